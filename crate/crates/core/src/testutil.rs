use crate::numerics::{Ball, Mag, Precision, Scalar};

/// Whether `b` meets the reference decimal widened by `rel_tol` relative.
pub fn agrees(b: &Ball, reference: &str, rel_tol: f64) -> bool {
    let r: Scalar = reference.parse().expect("reference literal");
    let r = r.to_ball(Precision::new(256).unwrap());
    let slack = r.abs_upper().mul(Mag::from_f64_up(rel_tol));
    b.overlaps(&r.add_error(slack))
}
