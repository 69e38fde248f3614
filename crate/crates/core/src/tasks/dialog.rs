//! Templated Commander utterances: one task directive (sometimes split over
//! two utterances) followed by location hints for hidden objects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{Family, LocationHint, TaskSpec};
use crate::world::{ObjectType, WorldState};

const NUMBER_WORDS: [&str; 11] =
    ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];

fn article(t: ObjectType) -> &'static str {
    match t.lower_words().as_bytes()[0] {
        b'a' | b'e' | b'i' | b'o' | b'u' => "an",
        _ => "a",
    }
}

fn prep(y: ObjectType) -> &'static str {
    let info = y.info();
    if info.openable || info.enclosed || matches!(y, ObjectType::Sink | ObjectType::Bowl | ObjectType::Pot) {
        "in"
    } else {
        "on"
    }
}

/// Hints for referenced types whose first reachable instance is hidden in a
/// closed receptacle.
pub fn location_hints(task: &TaskSpec, world: &WorldState) -> Vec<LocationHint> {
    let mut hints = Vec::new();
    for t in task.referenced_types() {
        let first = world
            .of_type(t)
            .find(|o| !world.ancestors(o.id).iter().any(|a| a.kind.info().enclosed && !a.kind.info().openable));
        let Some(o) = first else { continue };
        if !world.is_occluded(o.id) {
            continue;
        }
        if let Some(c) = o.state.contained_in {
            hints.push(LocationHint { object: t, container: c.kind });
        }
    }
    hints.sort();
    hints.dedup();
    hints
}

fn directive(task: &TaskSpec, rng: &mut ChaCha8Rng) -> Vec<String> {
    let p = task.params;
    let variant = rng.gen_range(0..2);
    let n = p.n.unwrap_or(1) as usize;
    let num = if rng.gen_bool(0.5) { n.to_string() } else { NUMBER_WORDS[n.min(10)].to_string() };
    let x = p.x.map(|t| t.lower_words()).unwrap_or("");
    let xs = p.x.map(|t| t.plural_words()).unwrap_or("");
    let y = p.y.map(|t| t.lower_words()).unwrap_or("");
    let yp = p.y.map(prep).unwrap_or("on");
    let lines: Vec<String> = match (task.family, variant) {
        (Family::Coffee, 0) => vec!["make a mug of coffee".into()],
        (Family::Coffee, _) => vec!["i would like some coffee".into(), "please use a clean mug".into()],
        (Family::WaterPlant, 0) => vec!["water the plant".into()],
        (Family::WaterPlant, _) => vec!["the plant needs some water".into()],
        (Family::PlateOfToast, 0) => vec!["make a plate of toast".into()],
        (Family::PlateOfToast, _) => vec!["make a slice of toast".into(), "serve it on a plate".into()],
        (Family::CleanAllX, 0) => vec![format!("clean all the {xs}")],
        (Family::CleanAllX, _) => vec![format!("please rinse all {xs}")],
        (Family::PutAllXOnY, 0) => vec![format!("put all the {xs} {yp} the {y}")],
        (Family::PutAllXOnY, _) => vec![format!("collect all the {xs}"), format!("put them {yp} the {y}")],
        (Family::PutAllXInOneY, 0) => vec![format!("put all the {xs} in one {y}")],
        (Family::PutAllXInOneY, _) => vec![format!("place all {xs} in a single {y}")],
        (Family::NSlicesOfXInY, 0) => vec![format!("make {num} slices of {x}"), format!("serve them on a {y}")],
        (Family::NSlicesOfXInY, _) => vec![format!("make {num} slices of {x} in a {y}")],
        (Family::NCookedSlicesOfXInY, 0) => vec![format!("cook {num} slices of {x}"), format!("serve them on a {y}")],
        (Family::NCookedSlicesOfXInY, _) => vec![format!("make {num} cooked slices of {x} in a {y}")],
        (Family::BoilX, 0) => vec![format!("boil {} {x}", p.x.map(article).unwrap_or("a"))],
        (Family::BoilX, _) => vec![format!("please boil the {x}")],
        (Family::Salad, 0) => vec!["make a salad".into()],
        (Family::Salad, _) => vec!["make a salad with lettuce and tomato".into()],
        (Family::Sandwich, 0) => vec!["make a sandwich".into()],
        (Family::Sandwich, _) => vec!["make a sandwich with toast lettuce and tomato".into()],
        (Family::Breakfast, 0) => vec!["make breakfast".into()],
        (Family::Breakfast, _) => vec!["make coffee and a plate of toast".into()],
    };
    lines
}

pub fn render_hint(h: LocationHint, variant: bool) -> String {
    if variant {
        format!("you can find the {} in the {}", h.object.lower_words(), h.container.lower_words())
    } else {
        format!("the {} is inside the {}", h.object.lower_words(), h.container.lower_words())
    }
}

/// Directive utterances followed by one utterance per location hint.
pub fn render_dialog(task: &TaskSpec, world: &WorldState, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = directive(task, &mut rng);
    for h in location_hints(task, world) {
        out.push(render_hint(h, rng.gen_bool(0.5)));
    }
    out
}
