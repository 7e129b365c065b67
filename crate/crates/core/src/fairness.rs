//! The concept-derived lens direction.
//!
//! Each concept is a pair of polarity sentences (e.g. responsible vs
//! irresponsible). The direction is the unit vector spanning the signed sum
//! of the pair differences; scoring a sentence embedding against it yields a
//! cosine value in `[-1, 1]`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{
    cosine_similarity, l2_normalize, linear_combination, project_lens, LensValues, PointCloud,
    Vector,
};

/// Two polarity sentences for one concept, with their embeddings once resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptPair {
    pub name: String,
    pub positive_text: String,
    pub negative_text: String,
    pub positive_vec: Option<Vector>,
    pub negative_vec: Option<Vector>,
}

impl ConceptPair {
    pub fn new(
        name: impl Into<String>,
        positive_text: impl Into<String>,
        negative_text: impl Into<String>,
    ) -> Result<Self> {
        let (name, positive_text, negative_text) =
            (name.into(), positive_text.into(), negative_text.into());
        if positive_text.is_empty() || negative_text.is_empty() || name.is_empty() {
            return Err(Error::InvalidParam(
                "concept name and texts must be nonempty".into(),
            ));
        }
        if positive_text == negative_text {
            return Err(Error::InvalidParam(format!(
                "concept `{name}` has identical polarity texts"
            )));
        }
        Ok(ConceptPair {
            name,
            positive_text,
            negative_text,
            positive_vec: None,
            negative_vec: None,
        })
    }

    fn resolved(&self) -> Result<(&Vector, &Vector)> {
        match (&self.positive_vec, &self.negative_vec) {
            (Some(p), Some(n)) => Ok((p, n)),
            _ => Err(Error::InvalidParam(format!(
                "concept `{}` has unresolved embeddings",
                self.name
            ))),
        }
    }

    /// Fills both embeddings by looking the exact sentence text up as a
    /// record id in `cloud`.
    pub fn resolve_from_cloud(&mut self, cloud: &PointCloud) -> Result<()> {
        let pos = cloud
            .get(&self.positive_text)
            .ok_or_else(|| Error::UnknownRecord(self.positive_text.clone()))?;
        let neg = cloud
            .get(&self.negative_text)
            .ok_or_else(|| Error::UnknownRecord(self.negative_text.clone()))?;
        self.positive_vec = Some(pos.clone());
        self.negative_vec = Some(neg.clone());
        Ok(())
    }
}

/// One signed contribution to the direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub concept: String,
    pub sign: i8,
    pub text: String,
}

/// The unit lens direction with its construction record.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessDirection {
    pub direction: Vector,
    pub provenance: Vec<Provenance>,
    /// Norm of the signed sum before normalization.
    pub raw_norm: f64,
}

const DEFAULT_TABLE: [(&str, &str, &str); 5] = [
    // "respondible" kept verbatim from the source sentence list;
    // see corrected_concept_table for the fixed spelling.
    (
        "responsibility",
        "it was very respondible",
        "it was very irresponsible",
    ),
    ("joy", "it was joyous", "it was sad"),
    (
        "societal-benefit",
        "it was beneficial to society",
        "it was not beneficial to society",
    ),
    (
        "reward",
        "was free to and rewarded",
        "was sent to prison and punished",
    ),
    ("benefit", "it was beneficial", "it was harmful"),
];

/// The built-in five-concept table, sentence strings verbatim.
pub fn default_concept_table() -> Vec<ConceptPair> {
    DEFAULT_TABLE
        .iter()
        .map(|(name, pos, neg)| ConceptPair::new(*name, *pos, *neg).expect("static table"))
        .collect()
}

/// The built-in table with the `respondible` spelling corrected.
pub fn corrected_concept_table() -> Vec<ConceptPair> {
    let mut table = default_concept_table();
    table[0].positive_text = "it was very responsible".into();
    table
}

/// Builds the unit direction from resolved concept pairs.
///
/// Each pair contributes `positive - negative`, computed per pair and then
/// accumulated in pair order; with `normalize_concepts` every concept
/// embedding is scaled to unit norm first so no concept dominates through its
/// embedding norm. Pairwise differences keep the construction exactly
/// antisymmetric under polarity swaps.
pub fn build_fairness_direction(
    pairs: &[ConceptPair],
    normalize_concepts: bool,
) -> Result<FairnessDirection> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput(
            "at least one concept pair required".into(),
        ));
    }
    let mut diffs = Vec::with_capacity(pairs.len());
    let mut provenance = Vec::with_capacity(pairs.len() * 2);
    for pair in pairs {
        let (pos, neg) = pair.resolved()?;
        let (pos, neg) = if normalize_concepts {
            (
                l2_normalize(pos).map_err(|_| Error::DegenerateVector {
                    context: format!("concept `{}` positive embedding", pair.name),
                })?,
                l2_normalize(neg).map_err(|_| Error::DegenerateVector {
                    context: format!("concept `{}` negative embedding", pair.name),
                })?,
            )
        } else {
            (pos.clone(), neg.clone())
        };
        diffs.push(linear_combination(&[(1.0, &pos), (-1.0, &neg)])?);
        provenance.push(Provenance {
            concept: pair.name.clone(),
            sign: 1,
            text: pair.positive_text.clone(),
        });
        provenance.push(Provenance {
            concept: pair.name.clone(),
            sign: -1,
            text: pair.negative_text.clone(),
        });
    }
    let terms: Vec<(f64, &Vector)> = diffs.iter().map(|d| (1.0, d)).collect();
    let raw = linear_combination(&terms)?;
    let raw_norm = raw.norm();
    if raw_norm == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let direction = l2_normalize(&raw).map_err(|_| Error::DegenerateDirection)?;
    Ok(FairnessDirection {
        direction,
        provenance,
        raw_norm,
    })
}

/// Cosine score of an embedding against the direction, in `[-1, 1]`.
pub fn fairness_score(embedding: &Vector, fd: &FairnessDirection) -> Result<f64> {
    cosine_similarity(embedding, &fd.direction)
}

/// Scores every record in the cloud; identical to the cosine lens projection.
pub fn score_corpus(cloud: &PointCloud, fd: &FairnessDirection) -> Result<LensValues> {
    project_lens(cloud, &fd.direction)
}

/// Serialized lens direction with its construction record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionFile {
    pub kind: String,
    pub model: String,
    pub dim: usize,
    pub normalize_concepts: bool,
    pub raw_norm: f64,
    pub direction: Vector,
    pub provenance: Vec<Provenance>,
}

pub const DIRECTION_FILE_KIND: &str = "lens-direction";

impl DirectionFile {
    pub fn new(fd: &FairnessDirection, model: impl Into<String>, normalize_concepts: bool) -> Self {
        DirectionFile {
            kind: DIRECTION_FILE_KIND.into(),
            model: model.into(),
            dim: fd.direction.dim(),
            normalize_concepts,
            raw_norm: fd.raw_norm,
            direction: fd.direction.clone(),
            provenance: fd.provenance.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidParam(format!("unserializable direction: {e}")))?;
        body.push('\n');
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    /// Loads and validates: kind must match, the direction must be unit
    /// length within 1e-9 and its dimension must match the header.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: DirectionFile =
            serde_json::from_str(&raw).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        if file.kind != DIRECTION_FILE_KIND {
            return Err(Error::parse(
                path,
                0,
                format!("expected kind `{DIRECTION_FILE_KIND}`, got `{}`", file.kind),
            ));
        }
        if file.direction.dim() != file.dim {
            return Err(Error::parse(
                path,
                0,
                format!(
                    "direction has {} components but header says dim {}",
                    file.direction.dim(),
                    file.dim
                ),
            ));
        }
        if (file.direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::parse(
                path,
                0,
                format!(
                    "direction is not unit length (norm {})",
                    file.direction.norm()
                ),
            ));
        }
        Ok(file)
    }
}

/// Reads a concept table: one pair per line, tab-separated
/// `name<TAB>positive_text<TAB>negative_text`;
/// blank lines and `#` comments are skipped.
pub fn load_concept_table(path: &Path) -> Result<Vec<ConceptPair>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::parse(
                path,
                lineno,
                format!("duplicate concept name `{}`", fields[0]),
            ));
        }
        let pair = ConceptPair::new(fields[0], fields[1], fields[2])
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        pairs.push(pair);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput(format!(
            "concept table {} has no pairs",
            path.display()
        )));
    }
    Ok(pairs)
}

/// Serializes a concept table in the same tab-separated format.
pub fn concept_table_to_tsv(pairs: &[ConceptPair]) -> String {
    let mut out = String::from("# concept table: name<TAB>positive_text<TAB>negative_text\n");
    for p in pairs {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            p.name, p.positive_text, p.negative_text
        ));
    }
    out
}

pub fn save_concept_table(pairs: &[ConceptPair], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(concept_table_to_tsv(pairs).as_bytes())
        .map_err(|e| Error::io(path, e))
}
