//! Named sequences and measures used by the CLI and the tests.

use serde::Serialize;

use crate::classify::WitnessKind;
use crate::error::{Error, Result};
use crate::measures::{CantorPart, Density, MeasureModel, MeasureRef, Realization};
use crate::sequences::{BlockTarget, SequenceSpec, WeightFormula};

#[derive(Debug, Clone, Serialize)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: SequenceSpec,
    /// Witness subspaces worth offering to the converter.
    pub witnesses: Vec<WitnessKind>,
    /// A ladder that is cheap to run.
    pub suggested_ladder: &'static str,
}

fn weighted(w: WeightFormula) -> SequenceSpec {
    SequenceSpec::WeightedBasis { weight: w }
}

fn exponential(measure: &str, one_sided: bool) -> SequenceSpec {
    SequenceSpec::Exponential {
        measure: MeasureRef::Named(measure.into()),
        window: None,
        one_sided,
        realization: Realization::CoefficientSpace,
    }
}

pub fn entries() -> Vec<GalleryEntry> {
    use WitnessKind::*;
    let e = |name, description, spec, witnesses, suggested_ladder| GalleryEntry {
        name,
        description,
        spec,
        witnesses,
        suggested_ladder,
    };
    vec![
        e(
            "orthonormal",
            "standard orthonormal basis {e_n}",
            weighted(WeightFormula::Constant(1.0)),
            vec![Singular],
            "d=16..256:x2",
        ),
        e(
            "weighted-basis-n",
            "{n e_n}: f_0 = 0, incomplete",
            weighted(WeightFormula::N),
            vec![Singular, ZeroSum],
            "d=16..512:x2",
        ),
        e(
            "weighted-basis-n-plus-one",
            "{(n+1) e_n}",
            weighted(WeightFormula::NPlusOne),
            vec![Singular],
            "d=16..512:x2",
        ),
        e("weighted-basis-inv", "{(n+1)^-1 e_n}", weighted(WeightFormula::InvNPlusOne), vec![Singular], "d=16..512:x2"),
        e(
            "union",
            "{(n+1) e_n} together with {(n+1)^-1 e_n}",
            SequenceSpec::Union {
                parts: vec![weighted(WeightFormula::NPlusOne), weighted(WeightFormula::InvNPlusOne)],
            },
            vec![Singular],
            "d=16..512:x2",
        ),
        e(
            "parseval-blocks",
            "blocks of k copies of e_k / sqrt k",
            SequenceSpec::ParsevalBlocks {},
            vec![Singular],
            "d=8..64:x2",
        ),
        e(
            "block-weighted-basis",
            "{a_n e_n} in the block coordinate space, a_n = sqrt k then 1/sqrt k",
            SequenceSpec::BlockWeightedBasis { target: BlockTarget::Standard },
            vec![BlockRange, Singular],
            "d=8..32:x2",
        ),
        e(
            "block-weighted-parseval",
            "{a_n g_n} for the Parseval blocks g_n",
            SequenceSpec::BlockWeightedBasis { target: BlockTarget::Parseval },
            vec![Singular],
            "d=8..32:x2",
        ),
        e(
            "exp-lebesgue",
            "exponentials in L^2 of Lebesgue measure",
            exponential("lebesgue", false),
            vec![Singular],
            "d=17..129:+16",
        ),
        e(
            "exp-affine",
            "exponentials in L^2((1/2 + x) dx)",
            exponential("affine", false),
            vec![Singular],
            "d=17..129:+16",
        ),
        e(
            "exp-cantor",
            "one-sided exponentials in L^2 of the Cantor measure",
            exponential("cantor", true),
            vec![Singular],
            "d=16..256:x2",
        ),
        e(
            "exp-half-cantor",
            "exponentials for (Lebesgue + Cantor) / 2",
            exponential("half-lebesgue-half-cantor", false),
            vec![Singular],
            "d=17..129:+16",
        ),
    ]
}

fn strip(name: &str) -> &str {
    name.strip_prefix("gallery:").unwrap_or(name)
}

pub fn entry(name: &str) -> Result<GalleryEntry> {
    let key = strip(name);
    entries()
        .into_iter()
        .find(|e| e.name == key)
        .ok_or_else(|| Error::InvalidSpec(format!("unknown gallery sequence '{key}'")))
}

pub fn spec(name: &str) -> Result<SequenceSpec> {
    entry(name).map(|e| e.spec)
}

pub const MEASURE_NAMES: [&str; 6] = ["lebesgue", "affine", "cantor", "half-lebesgue-half-cantor", "step", "dirac"];

/// Named measures: `lebesgue`, `affine` (density 1/2 + x), `cantor`
/// (middle thirds), `half-lebesgue-half-cantor`, `step` (density 2 on
/// [0, 1/4) and 2/3 elsewhere), `dirac` (unit atom at 0).
pub fn measure(name: &str) -> Result<MeasureModel> {
    match strip(name) {
        "lebesgue" => Ok(MeasureModel::lebesgue()),
        "affine" => MeasureModel::affine(0.5, 1.0),
        "cantor" => Ok(MeasureModel::middle_thirds_cantor()),
        "half-lebesgue-half-cantor" => {
            MeasureModel::new(Some(Density::Constant { c: 0.5 }), vec![], Some(CantorPart::middle_thirds(0.5)))
        }
        "step" => {
            MeasureModel::new(Some(Density::Grid { xs: vec![0.0, 0.25], gs: vec![2.0, 2.0 / 3.0] }), vec![], None)
        }
        "dirac" => MeasureModel::dirac(0.0),
        other => Err(Error::InvalidMeasure(format!("unknown gallery measure '{other}'"))),
    }
}
