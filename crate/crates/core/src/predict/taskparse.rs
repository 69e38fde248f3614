//! Template grammar over Commander utterances: task family, parameters and
//! location hints.

use crate::tasks::{Family, LocationHint, TaskParams, TaskSpec};
use crate::world::ObjectType;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Type(ObjectType),
    Num(u32),
    Word(&'a str),
}

/// Multi-word phrases first so that the longest match wins.
const PHRASES: &[(&[&str], ObjectType)] = {
    use ObjectType::*;
    &[
        (&["coffee", "machine"], CoffeeMachine),
        (&["coffee", "maker"], CoffeeMachine),
        (&["dining", "table"], DiningTable),
        (&["display", "case"], DisplayCase),
        (&["micro", "wave"], Microwave),
        (&["counter", "top"], CounterTop),
        (&["potato", "slice"], PotatoSliced),
        (&["potato", "slices"], PotatoSliced),
        (&["tomato", "slice"], TomatoSliced),
        (&["tomato", "slices"], TomatoSliced),
        (&["bread", "slice"], BreadSliced),
        (&["bread", "slices"], BreadSliced),
        (&["lettuce", "slice"], LettuceSliced),
        (&["lettuce", "slices"], LettuceSliced),
    ]
};

fn single(word: &str) -> Option<ObjectType> {
    use ObjectType::*;
    Some(match word {
        "potato" | "potatoes" => Potato,
        "tomato" | "tomatoes" => Tomato,
        "bread" | "loaf" => Bread,
        "lettuce" => Lettuce,
        "mug" | "mugs" => Mug,
        "cup" | "cups" => Cup,
        "plate" | "plates" => Plate,
        "bowl" | "bowls" => Bowl,
        "pot" | "pots" => Pot,
        "knife" | "knives" => Knife,
        "fork" | "forks" => Fork,
        "fridge" | "refrigerator" => Fridge,
        "microwave" => Microwave,
        "sink" => Sink,
        "faucet" | "tap" => Faucet,
        "counter" | "counters" | "countertop" => CounterTop,
        "table" => DiningTable,
        "stove" => Stove,
        "plant" | "plants" => Plant,
        "drawer" | "drawers" => Drawer,
        "cabinet" | "cabinets" | "cupboard" => Cabinet,
        _ => return None,
    })
}

fn number(word: &str) -> Option<u32> {
    const WORDS: [&str; 10] = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
    if let Ok(n) = word.parse::<u32>() {
        return Some(n);
    }
    WORDS.iter().position(|w| *w == word).map(|i| i as u32 + 1)
}

fn tokenize(words: &[String]) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < words.len() {
        for (phrase, t) in PHRASES {
            if words[i..].len() >= phrase.len() && phrase.iter().zip(&words[i..]).all(|(p, w)| p == w) {
                out.push(Tok::Type(*t));
                i += phrase.len();
                continue 'outer;
            }
        }
        let w = words[i].as_str();
        out.push(match (single(w), number(w)) {
            (Some(t), _) => Tok::Type(t),
            (None, Some(n)) => Tok::Num(n),
            _ => Tok::Word(w),
        });
        i += 1;
    }
    out
}

fn words_of(text: &str) -> Vec<String> {
    text.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_string).collect()
}

/// "the X is inside the Y", "X is in the Y", "you can find the X in the Y".
fn parse_hint(toks: &[Tok<'_>]) -> Option<LocationHint> {
    let types: Vec<(usize, ObjectType)> = toks
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match t {
            Tok::Type(t) => Some((i, *t)),
            _ => None,
        })
        .collect();
    let [(i, object), (j, container)] = types[..] else { return None };
    let between = &toks[i + 1..j];
    let has = |w: &str| between.contains(&Tok::Word(w));
    let found = toks[..i].contains(&Tok::Word("find"));
    let located = (has("is") && (has("inside") || has("in"))) || (found && has("in"));
    located.then_some(LocationHint { object, container })
}

fn sliceable_source(t: ObjectType) -> ObjectType {
    t.slice_source().unwrap_or(t)
}

fn parse_directive(toks: &[Tok<'_>]) -> Option<TaskSpec> {
    use ObjectType::*;
    let has = |w: &str| toks.contains(&Tok::Word(w));
    let types: Vec<ObjectType> = toks
        .iter()
        .filter_map(|t| match t {
            Tok::Type(t) => Some(*t),
            _ => None,
        })
        .collect();
    let mentions = |t: ObjectType| types.contains(&t);
    let first_num = toks.iter().find_map(|t| match t {
        Tok::Num(n) => Some(*n),
        _ => None,
    });
    let coffee = has("coffee") || mentions(CoffeeMachine);
    let toast = has("toast") || has("toasts");
    let simple = |f| Some(TaskSpec::simple(f));
    let with = |family, n, x, y| TaskSpec::new(family, TaskParams { n, x, y }).ok();

    if has("breakfast") || (coffee && toast) {
        return simple(Family::Breakfast);
    }
    if has("sandwich") {
        return simple(Family::Sandwich);
    }
    if has("salad") {
        return simple(Family::Salad);
    }
    if toast {
        return simple(Family::PlateOfToast);
    }
    if has("water") && mentions(Plant) {
        return simple(Family::WaterPlant);
    }
    if has("boil") {
        return with(Family::BoilX, None, types.first().copied().map(sliceable_source), None);
    }
    if (has("clean") || has("rinse") || has("wash")) && has("all") {
        return with(Family::CleanAllX, None, types.first().copied(), None);
    }
    if (has("put") || has("place") || has("collect") || has("move")) && has("all") {
        let x = *types.first()?;
        let y = types.iter().copied().find(|t| *t != x)?;
        let one = has("single") || toks.contains(&Tok::Num(1));
        let family = if one { Family::PutAllXInOneY } else { Family::PutAllXOnY };
        return with(family, None, Some(x), Some(y));
    }
    let slices = ["slice", "slices", "sliceses", "piece", "pieces"].iter().any(|w| has(w));
    if slices {
        if let Some(n) = first_num {
            let x = types.iter().map(|t| sliceable_source(*t)).find(|t| t.info().sliceable)?;
            let y = types.iter().copied().find(|t| matches!(t, Plate | Bowl)).unwrap_or(Plate);
            let cooked = has("cook") || has("cooked") || has("fry") || has("fried");
            let family = if cooked { Family::NCookedSlicesOfXInY } else { Family::NSlicesOfXInY };
            return with(family, Some(n), Some(x), Some(y));
        }
    }
    if coffee {
        return simple(Family::Coffee);
    }
    None
}

/// Family and parameters from the directive utterances, plus any location
/// hints. `None` when no directive is recognized.
pub fn parse_task_spec(dialog: &[String]) -> Option<TaskSpec> {
    let mut hints = Vec::new();
    let mut directive_words = Vec::new();
    for line in dialog {
        let words = words_of(line);
        let toks = tokenize(&words);
        match parse_hint(&toks) {
            Some(h) => hints.push(h),
            None => {
                directive_words.extend(words);
                directive_words.push(".".to_string());
            }
        }
    }
    let toks = tokenize(&directive_words);
    parse_directive(&toks).map(|t| t.with_hints(hints))
}
