//! Independent re-check of a decomposition report against its input matrix.
//! Every check is insensitive to the order of the terms.

use crate::bipartite::BipartiteMatrix;
use crate::decompose::{independent_images, is_unique_pure_decomposition};
use crate::error::{Error, Result};
use crate::matcore::{kron, psd_eig, ComplexMatrix, Tolerances};
use crate::toolkit::report::{mutually_orthogonal, DecompositionReport};

fn fail(check: &str, detail: impl std::fmt::Display) -> Error {
    Error::VerificationFailed(format!("{check}: {detail}"))
}

/// Names of the checks in the order they run.
pub const CHECKS: [&str; 9] = [
    "dimensions",
    "residual",
    "trace",
    "psd",
    "distinct",
    "independence",
    "orthogonality",
    "pure_product",
    "uniqueness",
];

pub fn verify_report(report: &DecompositionReport, t: &BipartiteMatrix, tol: &Tolerances) -> Result<()> {
    if (report.m, report.n) != t.dims() {
        return Err(fail(
            "dimensions",
            format!("report is {}x{}, input is {}x{}", report.m, report.n, t.m(), t.n()),
        ));
    }
    if report.p != report.terms.len() {
        return Err(fail("dimensions", format!("p = {} but {} terms", report.p, report.terms.len())));
    }
    let dec = report
        .to_decomposition()
        .map_err(|e| fail("dimensions", e))?;

    let norm = t.mat().norm_fro().max(f64::MIN_POSITIVE);
    let residual = dec.reassemble().dist(t.mat()) / norm;
    if residual > tol.recon {
        return Err(fail("residual", format!("{residual:.3e} > {:.1e}", tol.recon)));
    }

    for g in 0..dec.p() {
        let tr = dec.normalized(g).trace();
        if (tr.re - 1.0).abs() > tol.recon || tr.im.abs() > tol.recon {
            return Err(fail("trace", format!("term {} has trace {tr}", g + 1)));
        }
    }

    for (g, term) in dec.terms.iter().enumerate() {
        for (label, f) in [("A", &term.a), ("B", &term.b)] {
            psd_eig(f, tol).map_err(|e| fail("psd", format!("term {} factor {label}: {e}", g + 1)))?;
        }
    }

    for a in 0..dec.p() {
        for b in a + 1..dec.p() {
            if dec.normalized(a).dist(dec.normalized(b)) <= tol.cluster {
                return Err(fail("distinct", format!("terms {} and {} coincide", a + 1, b + 1)));
            }
        }
    }

    let independent: Vec<&ComplexMatrix> = (0..dec.p()).map(|g| dec.independent(g)).collect();
    if !independent_images(&independent, tol) {
        return Err(fail("independence", "rank of the sum is below the sum of ranks"));
    }
    if report.orthogonal && !mutually_orthogonal(&independent, tol) {
        return Err(fail("orthogonality", "claimed orthogonal images overlap"));
    }

    if !report.pure_product.is_empty() {
        let d = t.m() * t.n();
        let sum = report.pure_product.iter().fold(ComplexMatrix::zeros(d, d), |acc, pt| {
            let px = ComplexMatrix::projector(&pt.x.to_vec());
            let py = ComplexMatrix::projector(&pt.y.to_vec());
            &acc + &kron(&px, &py).scale_real(pt.weight)
        });
        if sum.rows() != d {
            return Err(fail("pure_product", "vector lengths do not match the dimensions"));
        }
        let r = sum.dist(t.mat()) / norm;
        if r > tol.recon {
            return Err(fail("pure_product", format!("residual {r:.3e} > {:.1e}", tol.recon)));
        }
    }

    if report.unique != is_unique_pure_decomposition(&dec, tol) {
        return Err(fail("uniqueness", format!("flag {} contradicts the factor ranks", report.unique)));
    }
    Ok(())
}
