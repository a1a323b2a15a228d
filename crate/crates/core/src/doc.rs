//! Structured text documents: the sequence interchange format used by the
//! command-line surface and by campaign reports.
//!
//! A sequence document stores the five group literals and the three
//! structure maps as integer matrices with one column per source
//! generator, rows in target coordinates. Matrices into or out of the
//! Γ-carrier are written in tag coordinates (the `basis_tags` order of
//! the Γ-group), which keeps documents readable independently of the
//! carrier's canonical invariant-factor presentation.

use std::sync::Arc;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::abgroup::{FgAbGroup, GroupElement, Homomorphism, Int, Matrix};
use crate::gamma::{gamma_n1, GammaGroup};
use crate::gseq::GammaSequence;
use crate::{Error, Result};

/// Serializable form of a Γ-sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub n: u32,
    #[serde(rename = "H_top")]
    pub h_top: String,
    #[serde(rename = "H_mid")]
    pub h_mid: String,
    #[serde(rename = "H_bot")]
    pub h_bot: String,
    pub pi: String,
    /// `H_top → Γ-carrier`, rows in tag coordinates.
    pub b: Vec<Vec<i64>>,
    /// `Γ-carrier → pi`, one column per tag generator.
    pub i: Vec<Vec<i64>>,
    /// `pi → H_mid` in canonical coordinates.
    pub h: Vec<Vec<i64>>,
}

fn to_i64(x: &Int) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::BadDocument("a matrix entry does not fit a 64-bit integer".into()))
}

/// Matrix entries as machine integers; documents are meant for desk-scale
/// data, so entries outside the i64 range are a document error.
pub fn matrix_to_rows(m: &Matrix) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let mut row = Vec::with_capacity(m.cols());
        for c in 0..m.cols() {
            row.push(to_i64(&m[(r, c)])?);
        }
        out.push(row);
    }
    Ok(out)
}

fn check_shape(name: &str, rows: &[Vec<i64>], want_rows: usize, want_cols: usize) -> Result<()> {
    if rows.len() != want_rows || rows.iter().any(|r| r.len() != want_cols) {
        return Err(Error::ShapeMismatch(format!(
            "document matrix {name} should be {want_rows} x {want_cols}"
        )));
    }
    Ok(())
}

fn column(rows: &[Vec<i64>], j: usize) -> Vec<Int> {
    rows.iter().map(|r| Int::from(r[j])).collect()
}

fn hom_from_element_columns(
    source: &FgAbGroup,
    target: &FgAbGroup,
    cols: &[GroupElement],
) -> Result<Homomorphism> {
    let mut m = Matrix::zeros(target.gens(), cols.len());
    for (j, x) in cols.iter().enumerate() {
        for (r, c) in x.coeffs().iter().enumerate() {
            m[(r, j)] = c.clone();
        }
    }
    Homomorphism::new(source.clone(), target.clone(), m)
}

/// The boundary map `b` of a sequence, with columns rewritten over the
/// carrier tags.
fn b_to_tag_rows(seq: &GammaSequence) -> Result<Vec<Vec<i64>>> {
    let gg = seq.gamma_bot();
    let cols: Vec<Vec<Int>> = (0..seq.h_top().gens())
        .map(|j| gg.carrier_to_tags(&seq.b().apply(&seq.h_top().basis_element(j))))
        .collect();
    let mut out = vec![vec![0i64; cols.len()]; gg.tag_count()];
    for (j, col) in cols.iter().enumerate() {
        for (k, c) in col.iter().enumerate() {
            out[k][j] = to_i64(c)?;
        }
    }
    Ok(out)
}

/// The inclusion `i` of a sequence, with one column per carrier tag.
fn i_to_tag_rows(seq: &GammaSequence) -> Result<Vec<Vec<i64>>> {
    let gg = seq.gamma_bot();
    let mut out = vec![vec![0i64; gg.tag_count()]; seq.pi().gens()];
    for k in 0..gg.tag_count() {
        let mut unit = vec![Int::zero(); gg.tag_count()];
        unit[k] = Int::one();
        let image = seq.i().apply(&gg.tags_to_carrier(&unit));
        for (r, c) in image.coeffs().iter().enumerate() {
            out[r][k] = to_i64(c)?;
        }
    }
    Ok(out)
}

impl SequenceDoc {
    /// Serialize a sequence.
    pub fn from_sequence(seq: &GammaSequence) -> Result<SequenceDoc> {
        Ok(SequenceDoc {
            n: seq.n(),
            h_top: seq.h_top().literal(),
            h_mid: seq.h_mid().literal(),
            h_bot: seq.h_bot().literal(),
            pi: seq.pi().literal(),
            b: b_to_tag_rows(seq)?,
            i: i_to_tag_rows(seq)?,
            h: matrix_to_rows(seq.h().matrix())?,
        })
    }

    /// Rebuild and validate the sequence this document describes.
    pub fn to_sequence(&self) -> Result<Arc<GammaSequence>> {
        let h_top = FgAbGroup::parse_literal(&self.h_top)?;
        let h_mid = FgAbGroup::parse_literal(&self.h_mid)?;
        let h_bot = FgAbGroup::parse_literal(&self.h_bot)?;
        let pi = FgAbGroup::parse_literal(&self.pi)?;
        let gg: GammaGroup = gamma_n1(self.n, &h_bot)?;
        let carrier = gg.carrier().clone();
        check_shape("b", &self.b, gg.tag_count(), h_top.gens())?;
        let b_cols: Vec<GroupElement> =
            (0..h_top.gens()).map(|j| gg.tags_to_carrier(&column(&self.b, j))).collect();
        let b = hom_from_element_columns(&h_top, &carrier, &b_cols)?;
        check_shape("i", &self.i, pi.gens(), gg.tag_count())?;
        let i_cols: Vec<GroupElement> = (0..carrier.gens())
            .map(|m| {
                let tags = gg.carrier_to_tags(&carrier.basis_element(m));
                let mut acc = vec![Int::zero(); pi.gens()];
                for (k, t) in tags.iter().enumerate() {
                    for (r, c) in column(&self.i, k).iter().enumerate() {
                        acc[r] += t * c;
                    }
                }
                pi.element(acc)
            })
            .collect();
        let i = hom_from_element_columns(&carrier, &pi, &i_cols)?;
        check_shape("h", &self.h, h_mid.gens(), pi.gens())?;
        let mut hm = Matrix::zeros(h_mid.gens(), pi.gens());
        for (r, row) in self.h.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                hm[(r, c)] = Int::from(*v);
            }
        }
        let h = Homomorphism::new(pi.clone(), h_mid.clone(), hm)?;
        Ok(Arc::new(GammaSequence::new(self.n, h_top, h_mid, h_bot, pi, b, i, h)?))
    }

    /// Parse a JSON document.
    pub fn parse(text: &str) -> Result<SequenceDoc> {
        serde_json::from_str(text)
            .map_err(|e| Error::BadDocument(format!("sequence document does not parse: {e}")))
    }

    /// Compact JSON with a fixed field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gseq::moore_sequence;

    #[test]
    fn moore_document_round_trips() {
        let h = FgAbGroup::parse_literal("2 x 4").unwrap();
        let seq = moore_sequence(&h, 2).unwrap();
        let doc = SequenceDoc::from_sequence(&seq).unwrap();
        assert_eq!(doc.h_mid, "2 x 4");
        assert_eq!(doc.pi, "2 x 4");
        assert_eq!(doc.h_top, "0");
        assert_eq!(doc.h, vec![vec![1, 0], vec![0, 1]]);
        let text = doc.to_json();
        let parsed = SequenceDoc::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        let seq2 = parsed.to_sequence().unwrap();
        assert_eq!(SequenceDoc::from_sequence(&seq2).unwrap(), doc);
    }

    #[test]
    fn documents_reject_mismatched_shapes_and_bad_json() {
        let doc = SequenceDoc {
            n: 2,
            h_top: "0".into(),
            h_mid: "2".into(),
            h_bot: "0".into(),
            pi: "2".into(),
            b: vec![],
            i: vec![vec![]],
            h: vec![vec![1, 7]],
        };
        assert!(matches!(doc.to_sequence(), Err(Error::ShapeMismatch(_))));
        assert!(matches!(SequenceDoc::parse("{"), Err(Error::BadDocument(_))));
        assert!(matches!(SequenceDoc::parse("{\"n\": 2}"), Err(Error::BadDocument(_))));
    }

    #[test]
    fn oversized_entries_are_a_document_error() {
        let big = Int::from(u64::MAX);
        let g = FgAbGroup::new(0, vec![big.clone() + Int::from(2)]).unwrap();
        let mut m = Matrix::zeros(1, 1);
        m[(0, 0)] = big;
        let f = Homomorphism::new(g.clone(), g, m).unwrap();
        assert!(matches!(matrix_to_rows(f.matrix()), Err(Error::BadDocument(_))));
    }

    #[test]
    fn carrier_matrices_use_tag_coordinates() {
        // Degree 2 over Z_2 x Z_2: tags g(0), g(1), t(0,1) of orders
        // 4, 4, 2; pi is the same group in canonical form. The inclusion
        // below sends g(0), g(1), t(0,1) to the canonical generators of
        // orders 4, 4, 2 respectively.
        let doc = SequenceDoc {
            n: 2,
            h_top: "0".into(),
            h_mid: "0".into(),
            h_bot: "2 x 2".into(),
            pi: "2 x 4 x 4".into(),
            b: vec![vec![], vec![], vec![]],
            i: vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]],
            h: vec![],
        };
        let seq = doc.to_sequence().unwrap();
        assert_eq!(seq.gamma_bot().carrier().literal(), "2 x 4 x 4");
        assert!(seq.i().is_isomorphism());
        assert_eq!(SequenceDoc::from_sequence(&seq).unwrap(), doc);
    }
}
