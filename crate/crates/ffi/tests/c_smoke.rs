use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "quasistable.h"

static const char *M1 =
    "{\"workers\":[\"w1\",\"w2\"],\"firms\":[\"f1\",\"f2\"],"
    "\"contracts\":[{\"id\":\"a\",\"worker\":\"w1\",\"firm\":\"f1\",\"terms\":\"\"},"
    "{\"id\":\"b\",\"worker\":\"w1\",\"firm\":\"f2\",\"terms\":\"\"},"
    "{\"id\":\"c\",\"worker\":\"w2\",\"firm\":\"f1\",\"terms\":\"\"},"
    "{\"id\":\"d\",\"worker\":\"w2\",\"firm\":\"f2\",\"terms\":\"\"}],"
    "\"choices\":{"
    "\"w1\":{\"kind\":\"greedy\",\"quota\":1,\"priority\":[\"a\",\"b\"],\"acceptable\":[\"a\",\"b\"]},"
    "\"w2\":{\"kind\":\"greedy\",\"quota\":1,\"priority\":[\"d\",\"c\"],\"acceptable\":[\"c\",\"d\"]},"
    "\"f1\":{\"kind\":\"greedy\",\"quota\":1,\"priority\":[\"c\",\"a\"],\"acceptable\":[\"a\",\"c\"]},"
    "\"f2\":{\"kind\":\"greedy\",\"quota\":1,\"priority\":[\"b\",\"d\"],\"acceptable\":[\"b\",\"d\"]}}}";

int main(void) {
    QsMarket *m = NULL;
    if (qs_market_from_json(M1, &m) != QS_STATUS_OK) {
        fprintf(stderr, "load: %s\n", qs_last_error());
        return 1;
    }
    QsTrace *t = NULL;
    if (qs_da_run(m, NULL, NULL, "", "full", 0, &t) != QS_STATUS_OK) return 2;
    char *outcome = NULL;
    if (qs_trace_outcome(t, &outcome) != QS_STATUS_OK) return 3;
    printf("outcome %s steps %zu\n", outcome, qs_trace_len(t));
    int ok = strcmp(outcome, "b,c") == 0;
    qs_string_free(outcome);
    qs_trace_free(t);

    QsCheck c;
    if (qs_check(m, NULL, NULL, "zz", &c) != QS_STATUS_INPUT) return 4;
    printf("error %s\n", qs_last_error());

    QsGenParams p = qs_gen_params_default();
    p.family = QS_FAMILY_MIXED;
    QsMarket *g = NULL;
    if (qs_gen(&p, &g) != QS_STATUS_OK) return 5;
    qs_market_free(g);
    qs_market_free(m);
    printf("version %s\n", qs_version());
    return ok ? 0 : 6;
}
"#;

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/<test binary>
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}

#[test]
fn c_program_links_against_header_and_library() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib_dir = target_dir();
    if !lib_dir.join("libquasistable_ffi.so").exists() {
        eprintln!("no shared library in {}; skipping", lib_dir.display());
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let build = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lquasistable_ffi")
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));

    let run = Command::new(&exe).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "exit {:?}: {stdout}", run.status.code());
    assert!(stdout.contains("outcome b,c steps 1"), "{stdout}");
    assert!(stdout.contains("unknown contract id \"zz\""), "{stdout}");
}
