use std::collections::BTreeSet;

use crate::fraction::Fraction;
use crate::model::{Etg, Label};

/// Edit distance between two strings, counted in chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 − levenshtein / max(len)` over normalized labels.
pub fn name_sim(a: &Label, b: &Label) -> Fraction {
    let (a, b) = (a.as_str(), b.as_str());
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return Fraction::ONE;
    }
    Fraction::of(longest - levenshtein(a, b), longest)
}

/// Names of the properties available on `etype`, inherited ones included.
pub fn property_names(g: &Etg, etype: &Label) -> BTreeSet<Label> {
    g.properties_of(etype).into_keys().collect()
}

/// Share of the model etype's properties that the ontology etype also
/// declares. Zero when the model etype has none.
pub fn property_sharability(model: &BTreeSet<Label>, ontology: &BTreeSet<Label>) -> Fraction {
    if model.is_empty() {
        return Fraction::ZERO;
    }
    Fraction::of(model.intersection(ontology).count(), model.len())
}

/// Jaccard overlap of two property-name sets; zero when both are empty.
pub fn property_overlap(a: &BTreeSet<Label>, b: &BTreeSet<Label>) -> Fraction {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        Fraction::ZERO
    } else {
        Fraction::of(inter, union)
    }
}

/// Similarity of two etypes: a weighted mean of name similarity and
/// property overlap. Symmetric in its two (name, properties) arguments.
pub fn etr_score(
    name_weight: Fraction,
    a: (&Label, &BTreeSet<Label>),
    b: (&Label, &BTreeSet<Label>),
) -> Fraction {
    Fraction::blend(name_weight, name_sim(a.0, b.0), property_overlap(a.1, b.1))
}
