//! Small hand-built markets used by tests, documentation and the FFI smoke tests.

use crate::format::parse_market;
use crate::model::Market;

/// Two workers, two firms, one contract per pair, unit quotas:
/// `w1: a > b`, `w2: d > c`, `f1: c > a`, `f2: b > d`.
/// Its stable allocations are `{a,d}` (worker-optimal) and `{b,c}` (firm-optimal).
pub const M1_JSON: &str = r#"{
  "workers": ["w1", "w2"],
  "firms": ["f1", "f2"],
  "contracts": [
    {"id": "a", "worker": "w1", "firm": "f1", "terms": ""},
    {"id": "b", "worker": "w1", "firm": "f2", "terms": ""},
    {"id": "c", "worker": "w2", "firm": "f1", "terms": ""},
    {"id": "d", "worker": "w2", "firm": "f2", "terms": ""}
  ],
  "choices": {
    "w1": {"kind": "greedy", "quota": 1, "priority": ["a", "b"], "acceptable": ["a", "b"]},
    "w2": {"kind": "greedy", "quota": 1, "priority": ["d", "c"], "acceptable": ["c", "d"]},
    "f1": {"kind": "greedy", "quota": 1, "priority": ["c", "a"], "acceptable": ["a", "c"]},
    "f2": {"kind": "greedy", "quota": 1, "priority": ["b", "d"], "acceptable": ["b", "d"]}
  }
}
"#;

/// A firm `f` that wants both `x` and `y` or nothing: not substitutable.
pub const COMPLEMENTARY_TABLE_JSON: &str = r#"{
  "workers": ["u1", "u2"],
  "firms": ["f"],
  "contracts": [
    {"id": "x", "worker": "u1", "firm": "f", "terms": ""},
    {"id": "y", "worker": "u2", "firm": "f", "terms": ""}
  ],
  "choices": {
    "u1": {"kind": "greedy", "quota": 1, "priority": ["x"], "acceptable": ["x"]},
    "u2": {"kind": "greedy", "quota": 1, "priority": ["y"], "acceptable": ["y"]},
    "f": {"kind": "table", "ranking": [["x", "y"], []]}
  }
}
"#;

pub fn m1() -> Market {
    parse_market(M1_JSON).expect("fixture is valid")
}

pub fn complementary_table_market() -> Market {
    parse_market(COMPLEMENTARY_TABLE_JSON).expect("fixture is valid")
}
