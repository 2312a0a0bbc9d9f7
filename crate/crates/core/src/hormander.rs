//! Pointwise bracket-spanning checks (Hörmander and parabolic Hörmander).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{lie_bracket, PolyVectorField, VectorFieldSystem};
use crate::linalg::numeric_rank;

/// Which generating set the bracket tower starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HormanderMode {
    /// 𝒱₀ = {X₁..X_r}; the drift only enters through brackets.
    Parabolic,
    /// 𝒱₀ = {X₀, X₁..X_r}.
    Full,
}

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedField {
    pub field: PolyVectorField,
    pub depth: usize,
    pub derivation: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointRank {
    pub point: Vec<f64>,
    pub rank: usize,
    pub required: usize,
    /// Smallest depth whose fields (all depths ≤ it) span; `None` if never.
    pub depth_reached: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketReport {
    pub mode: HormanderMode,
    pub max_depth: usize,
    pub rank_tol: f64,
    pub fields: Vec<GeneratedField>,
    pub points: Vec<PointRank>,
    pub spans_everywhere: bool,
}

fn name(i: usize) -> String {
    format!("X{}", i)
}

/// Breadth-first bracket tower, deduplicated by exact equality; zero fields
/// are dropped.
pub fn generate_brackets(system: &VectorFieldSystem, max_depth: usize, mode: HormanderMode) -> Vec<GeneratedField> {
    let mut all: Vec<GeneratedField> = Vec::new();
    let mut basis: Vec<(&PolyVectorField, String)> = Vec::with_capacity(system.noise.len() + 1);
    basis.push((&system.drift, name(0)));
    for (i, x) in system.noise.iter().enumerate() {
        basis.push((x, name(i + 1)));
    }

    let push = |all: &mut Vec<GeneratedField>, field: PolyVectorField, depth, derivation| -> bool {
        if field.is_zero() || all.iter().any(|g| g.field == field) {
            return false;
        }
        all.push(GeneratedField {
            field,
            depth,
            derivation,
        });
        true
    };

    let start = match mode {
        HormanderMode::Parabolic => 1,
        HormanderMode::Full => 0,
    };
    let mut frontier = Vec::new();
    for (f, n) in &basis[start..] {
        if push(&mut all, (*f).clone(), 0, n.clone()) {
            frontier.push(all.len() - 1);
        }
    }
    for depth in 1..=max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &idx in &frontier {
            for (xi, ni) in &basis {
                let prev = &all[idx];
                // dimensions agree by construction of the system
                let b = lie_bracket(xi, &prev.field).expect("dimension checked");
                let derivation = format!("[{},{}]", ni, prev.derivation);
                if push(&mut all, b, depth, derivation) {
                    next.push(all.len() - 1);
                }
            }
        }
        frontier = next;
    }
    all
}

/// Checks whether the bracket tower spans ℝᵐ at each of `points`.
pub fn check_hormander(
    system: &VectorFieldSystem,
    points: &[Vec<f64>],
    max_depth: usize,
    rank_tol: f64,
    mode: HormanderMode,
) -> Result<BracketReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no evaluation points".into()));
    }
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidArgument("rank_tol must be positive".into()));
    }
    if mode == HormanderMode::Parabolic && system.noise.is_empty() && max_depth == 0 {
        return Err(Error::EmptyGeneratingSet);
    }
    let m = system.dim();
    for p in points {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.len(),
            });
        }
    }
    let fields = generate_brackets(system, max_depth, mode);

    let mut ranks = Vec::with_capacity(points.len());
    for p in points {
        // m × k matrix, rows = coordinates, columns = fields; grown by depth
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut rank = 0;
        let mut depth_reached = None;
        for depth in 0..=max_depth {
            for g in fields.iter().filter(|g| g.depth == depth) {
                cols.push(g.field.eval_vec(p));
            }
            let k = cols.len();
            let mut data = Vec::with_capacity(m * k);
            for i in 0..m {
                data.extend(cols.iter().map(|c| c[i]));
            }
            rank = numeric_rank(&data, m, k, rank_tol);
            if rank == m && depth_reached.is_none() {
                depth_reached = Some(depth);
                break;
            }
        }
        ranks.push(PointRank {
            point: p.clone(),
            rank,
            required: m,
            depth_reached,
        });
    }
    let spans_everywhere = ranks.iter().all(|r| r.rank == r.required);
    Ok(BracketReport {
        mode,
        max_depth,
        rank_tol,
        fields,
        points: ranks,
        spans_everywhere,
    })
}

/// Parabolic convention: the drift is excluded from 𝒱₀.
pub fn check_parabolic_hormander(
    system: &VectorFieldSystem,
    points: &[Vec<f64>],
    max_depth: usize,
    rank_tol: f64,
) -> Result<BracketReport> {
    check_hormander(system, points, max_depth, rank_tol, HormanderMode::Parabolic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;
    use alloc::vec;

    fn degenerate_square() -> VectorFieldSystem {
        let x0 = PolyVectorField::new(vec![
            MultiPoly::from_terms(2, [(vec![0, 2], -1.0)]).unwrap(),
            MultiPoly::zero(2),
        ])
        .unwrap();
        let x1 = PolyVectorField::coordinate(2, 1).unwrap();
        VectorFieldSystem::new(x0, vec![x1]).unwrap()
    }

    #[test]
    fn degenerate_square_spans_at_depth_two() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![-1.0, 0.5]];
        let r = check_parabolic_hormander(&degenerate_square(), &pts, 2, DEFAULT_RANK_TOL).unwrap();
        assert!(r.spans_everywhere);
        let depths: Vec<_> = r.points.iter().map(|p| p.depth_reached).collect();
        assert!(r.points.iter().all(|p| p.rank == 2));
        // [X0,X1] = 2x₂∂₁ already spans off the line x₂ = 0
        assert_eq!(depths, [Some(2), Some(1), Some(1)]);
        let tower: Vec<&str> = r.fields.iter().map(|g| g.derivation.as_str()).collect();
        assert!(tower.contains(&"[X1,[X1,X0]]") || tower.contains(&"[X1,[X0,X1]]"));
        // depth 1 alone spans away from x₂ = 0
        let r1 = check_parabolic_hormander(&degenerate_square(), &pts, 1, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r1.points[0].rank, 1);
        assert_eq!(r1.points[1].rank, 2);
    }

    #[test]
    fn pure_drift_has_empty_tower() {
        let sys = VectorFieldSystem::new(PolyVectorField::constant(&[1.0, 0.0]), vec![]).unwrap();
        let r = check_parabolic_hormander(&sys, &[vec![0.0, 0.0]], 10, 1e-8).unwrap();
        assert!(r.fields.is_empty());
        assert_eq!(r.points[0].rank, 0);
        assert!(!r.spans_everywhere);
        assert_eq!(
            check_parabolic_hormander(&sys, &[vec![0.0, 0.0]], 0, 1e-8),
            Err(Error::EmptyGeneratingSet)
        );
    }

    #[test]
    fn full_mode_admits_drift() {
        // ∂₂² + ∂₁: Hörmander but not parabolic Hörmander
        let sys = VectorFieldSystem::new(
            PolyVectorField::coordinate(2, 0).unwrap(),
            vec![PolyVectorField::coordinate(2, 1).unwrap()],
        )
        .unwrap();
        let pts = [vec![0.3, 0.7]];
        assert!(
            check_hormander(&sys, &pts, 0, 1e-8, HormanderMode::Full)
                .unwrap()
                .spans_everywhere
        );
        assert!(!check_parabolic_hormander(&sys, &pts, 5, 1e-8).unwrap().spans_everywhere);
    }

    #[test]
    fn elliptic_spans_at_depth_zero() {
        let sys = VectorFieldSystem::new(
            PolyVectorField::zero(2),
            vec![
                PolyVectorField::coordinate(2, 0).unwrap(),
                PolyVectorField::coordinate(2, 1).unwrap(),
            ],
        )
        .unwrap();
        let r = check_parabolic_hormander(&sys, &[vec![5.0, -2.0]], 0, 1e-8).unwrap();
        assert_eq!(r.points[0].depth_reached, Some(0));
    }
}
