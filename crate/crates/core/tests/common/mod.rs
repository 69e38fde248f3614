#![allow(dead_code)]

use planbench::world::{build_world, ObjectId, SceneSpec, WorldState};

pub fn scene(value: serde_json::Value) -> SceneSpec {
    serde_json::from_value(value).expect("scene json")
}

pub fn world(value: serde_json::Value) -> WorldState {
    build_world(&scene(value)).expect("valid scene")
}

pub fn id(s: &str) -> ObjectId {
    s.parse().expect("object id")
}

/// Plain recursive edit distance with unit costs and no memoization.
pub fn brute_ed<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    match (a, b) {
        ([], _) => b.len(),
        (_, []) => a.len(),
        ([x, ra @ ..], [y, rb @ ..]) => {
            let sub = brute_ed(ra, rb) + usize::from(x != y);
            sub.min(brute_ed(ra, b) + 1).min(brute_ed(a, rb) + 1)
        }
    }
}
