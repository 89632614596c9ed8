//! Decomposition reports: a JSON document (the machine contract) and a text
//! rendering. Matrices are nested row-major arrays of `[re, im]` pairs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteMatrix;
use crate::decompose::{
    face_summary, independent_form, numerical_rank, pure_product_decomposition, CanonicalDecomposition,
    FaceReport, Side, Term,
};
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, Tolerances, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson(
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
                .collect(),
        )
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged matrix in report".into()));
        }
        let entries = self.0.iter().flatten().map(|&[a, b]| C64::new(a, b)).collect();
        ComplexMatrix::from_row_major(rows, cols, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorJson(pub Vec<[f64; 2]>);

impl From<&[C64]> for VectorJson {
    fn from(v: &[C64]) -> Self {
        VectorJson(v.iter().map(|z| [z.re, z.im]).collect())
    }
}

impl VectorJson {
    pub fn to_vec(&self) -> Vec<C64> {
        self.0.iter().map(|&[a, b]| C64::new(a, b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub a: MatrixJson,
    pub b: MatrixJson,
    pub rank_a: usize,
    pub rank_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureTermReport {
    pub weight: f64,
    pub x: VectorJson,
    pub y: VectorJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub verdict: String,
    pub side: Side,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub terms: Vec<TermReport>,
    pub pure_product: Vec<PureTermReport>,
    pub unique: bool,
    /// Images of the independent-side factors are mutually orthogonal.
    pub orthogonal: bool,
    pub face: FaceReport,
    /// `‖T − Σ A_γ ⊗ B_γ‖_F / ‖T‖_F`.
    pub residual: f64,
    /// Same residual for the pure-product terms.
    pub pure_residual: f64,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn verdict_label(side: Side) -> &'static str {
    match side {
        Side::B => "B-independent",
        Side::A => "A-independent",
    }
}

/// Mutual orthogonality of the images: `‖X Y‖_F ≤ tol.recon · ‖X‖_F ‖Y‖_F`.
pub fn mutually_orthogonal(mats: &[&ComplexMatrix], tol: &Tolerances) -> bool {
    mats.iter().enumerate().all(|(k, x)| {
        mats[k + 1..]
            .iter()
            .all(|y| (*x * *y).norm_fro() <= tol.recon * x.norm_fro() * y.norm_fro())
    })
}

/// Runs the full pipeline on `t` and collects the results.
pub fn build_report(
    t: &BipartiteMatrix,
    side: Side,
    tol: &Tolerances,
    seed: Option<u64>,
) -> Result<DecompositionReport> {
    let dec = independent_form(t, side, tol)?;
    Ok(report_from_decomposition(t, &dec, tol, seed))
}

pub fn report_from_decomposition(
    t: &BipartiteMatrix,
    dec: &CanonicalDecomposition,
    tol: &Tolerances,
    seed: Option<u64>,
) -> DecompositionReport {
    let pure = pure_product_decomposition(dec, tol);
    let norm = t.mat().norm_fro().max(f64::MIN_POSITIVE);
    let independent: Vec<&ComplexMatrix> = (0..dec.p()).map(|g| dec.independent(g)).collect();
    DecompositionReport {
        verdict: verdict_label(dec.side).to_string(),
        side: dec.side,
        m: dec.m,
        n: dec.n,
        p: dec.p(),
        terms: dec
            .terms
            .iter()
            .map(|term| TermReport {
                a: (&term.a).into(),
                b: (&term.b).into(),
                rank_a: numerical_rank(&term.a, tol),
                rank_b: numerical_rank(&term.b, tol),
            })
            .collect(),
        pure_product: pure
            .terms
            .iter()
            .map(|pt| PureTermReport {
                weight: pt.weight,
                x: pt.x.as_slice().into(),
                y: pt.y.as_slice().into(),
            })
            .collect(),
        unique: pure.unique,
        orthogonal: mutually_orthogonal(&independent, tol),
        face: face_summary(dec, tol),
        residual: dec.relative_residual(t),
        pure_residual: pure.reassemble().dist(t.mat()) / norm,
        tolerances: *tol,
        seed,
    }
}

impl DecompositionReport {
    /// Rebuilds the canonical decomposition stored in the report.
    pub fn to_decomposition(&self) -> Result<CanonicalDecomposition> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(Term { a: t.a.to_matrix()?, b: t.b.to_matrix()? }))
            .collect::<Result<Vec<_>>>()?;
        CanonicalDecomposition::from_terms(self.side, self.m, self.n, terms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {} (p={})", self.verdict, self.p);
        let _ = writeln!(s, "dimensions: m={} n={}", self.m, self.n);
        let _ = writeln!(s, "residual: {:.3e}", self.residual);
        let _ = writeln!(s, "orthogonal images: {}", yes_no(self.orthogonal));
        let _ = writeln!(s, "unique pure-product decomposition: {}", yes_no(self.unique));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let _ = writeln!(s, "term {}", k + 1);
            render_matrix(&mut s, &format!("A (rank {})", t.rank_a), &t.a);
            render_matrix(&mut s, &format!("B (rank {})", t.rank_b), &t.b);
        }
        let _ = writeln!(
            s,
            "pure product terms: {} (residual {:.3e})",
            self.pure_product.len(),
            self.pure_residual
        );
        for (k, t) in self.pure_product.iter().enumerate() {
            let _ = writeln!(
                s,
                "  {}: weight {:.6e}  x = {}  y = {}",
                k + 1,
                t.weight,
                render_vector(&t.x),
                render_vector(&t.y)
            );
        }
        let mode = match self.face.mode {
            crate::decompose::FaceMode::DisjointA => "disjoint_A",
            crate::decompose::FaceMode::RankOneA => "rank_one_A",
            crate::decompose::FaceMode::None => "none",
        };
        let _ = writeln!(s, "face mode: {mode}");
        for (k, f) in self.face.summands.iter().enumerate() {
            let terms: Vec<String> = f.terms.iter().map(|t| (t + 1).to_string()).collect();
            let dim = f.face_dim.map_or("unknown".to_string(), |d| d.to_string());
            let _ = writeln!(
                s,
                "  summand {}: terms [{}] rank_A {} rank_B {} face_dim {}",
                k + 1,
                terms.join(","),
                f.rank_a,
                f.rank_b,
                dim
            );
        }
        s
    }
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn render_entry(z: [f64; 2]) -> String {
    format!("{:+.6}{:+.6}i", z[0], z[1])
}

fn render_vector(v: &VectorJson) -> String {
    let parts: Vec<String> = v.0.iter().map(|&z| render_entry(z)).collect();
    format!("[{}]", parts.join(", "))
}

fn render_matrix(s: &mut String, label: &str, m: &MatrixJson) {
    let _ = writeln!(s, "  {label}:");
    for row in &m.0 {
        let parts: Vec<String> = row.iter().map(|&z| render_entry(z)).collect();
        let _ = writeln!(s, "    {}", parts.join("  "));
    }
}
