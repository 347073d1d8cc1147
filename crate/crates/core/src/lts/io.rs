//! JSON files holding structure constants as a nested `[i][j][k][l]` array.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LtsStructure;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtsFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// `constants[i][j][k][l]` is the `e_l` component of `[e_i, e_j, e_k]`.
    pub constants: Vec<Vec<Vec<Vec<f64>>>>,
}

impl LtsFile {
    pub fn from_structure(lts: &LtsStructure) -> Self {
        let n = lts.dim();
        let constants = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| lts.basis_bracket(i, j, k).to_vec()).collect())
                    .collect()
            })
            .collect();
        Self {
            dim: n,
            tol: Some(lts.tol()),
            constants,
        }
    }

    pub fn into_structure(self) -> Result<LtsStructure> {
        let n = self.dim;
        if self.constants.len() != n {
            return Err(invalid(format!(
                "constants has {} entries at depth 1, expected {n}",
                self.constants.len()
            )));
        }
        let mut flat = Vec::with_capacity(n.pow(4));
        for (i, a) in self.constants.iter().enumerate() {
            if a.len() != n {
                return Err(invalid(format!("constants[{i}] has length {}", a.len())));
            }
            for (j, b) in a.iter().enumerate() {
                if b.len() != n {
                    return Err(invalid(format!("constants[{i}][{j}] has length {}", b.len())));
                }
                for (k, c) in b.iter().enumerate() {
                    if c.len() != n {
                        return Err(invalid(format!(
                            "constants[{i}][{j}][{k}] has length {}",
                            c.len()
                        )));
                    }
                    flat.extend_from_slice(c);
                }
            }
        }
        let lts = LtsStructure::new(n, flat)?;
        match self.tol {
            Some(t) if !(t.is_finite() && t > 0.0) => {
                Err(invalid(format!("tol must be positive and finite, got {t}")))
            }
            Some(t) => Ok(lts.with_tol(t)),
            None => Ok(lts),
        }
    }
}

pub fn parse_lts_json(text: &str) -> Result<LtsStructure> {
    let file: LtsFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_structure()
}

pub fn read_lts_file(path: impl AsRef<Path>) -> Result<LtsStructure> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_lts_json(&text)
}

pub fn to_json(lts: &LtsStructure) -> String {
    serde_json::to_string_pretty(&LtsFile::from_structure(lts)).expect("serializable")
}
