use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lp::{besov_norm, psi};

use super::{remainder_exponents, representable_scales};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    /// Integrability exponent of the sequence.
    pub p: f64,
    /// Number of profiles requested per snapshot.
    pub max_profiles: usize,
    /// Stop once the residual remainder norm falls below this fraction of `‖f‖_p`.
    pub residual_threshold: f64,
    /// Stop once the best score falls below this fraction of `‖f‖_p`.
    pub min_fraction: f64,
    /// Number of trailing snapshots averaged into a profile surrogate.
    pub tail: usize,
}

impl Default for ExtractConfig {
    fn default() -> ExtractConfig {
        ExtractConfig {
            p: 4.0,
            max_profiles: 4,
            residual_threshold: 1e-2,
            min_fraction: 0.1,
            tail: 3,
        }
    }
}

/// One extracted bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub scale: f64,
    pub core: Vec<f64>,
    /// `|f * G_μ|(x) / ‖G_μ‖_{p'}` with `μ = λ / √(p - 1)`.
    pub score: f64,
    #[serde(skip)]
    pub lattice_core: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotExtraction {
    pub norm: f64,
    pub pieces: Vec<Piece>,
    /// Residual remainder norm divided by `‖f‖_p`, after each subtraction.
    pub residual_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractedProfile {
    pub scales: Vec<f64>,
    pub cores: Vec<Vec<f64>>,
    /// Average of the recentered, `L^p`-normalized pieces over the tail
    /// snapshots sharing the final scale.
    #[serde(skip)]
    pub surrogate: Option<SpectralField>,
    pub surrogate_samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Extraction {
    pub snapshots: Vec<SnapshotExtraction>,
    pub profiles: Vec<ExtractedProfile>,
    pub notice: Option<String>,
}

fn dyadic_scales(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = lo.log2().ceil() as i32;
    while 2f64.powi(k) <= hi {
        out.push(2f64.powi(k));
        k += 1;
    }
    out
}

/// `(best score, flat index)` of `|f * G_μ| / ‖G_μ‖_{p'}` over the lattice,
/// with kernel width `μ = λ / √(p - 1)` so that an `L^p`-normalized Gaussian
/// of width `λ` scores highest at `λ`.
fn best_point(f: &SpectralField, lambda: f64, p: f64) -> Result<(f64, usize)> {
    let g = f.grid().clone();
    let d = g.dim() as f64;
    let lambda = lambda / (p - 1.0).sqrt();
    let two_pi_l2 = 2.0 * std::f64::consts::PI * lambda * lambda;
    let conv = f.with_multiplier(|idx| two_pi_l2.powf(d / 2.0) * (-0.5 * lambda * lambda * g.xi2(idx)).exp());
    let q = p / (p - 1.0);
    let dual = (two_pi_l2 / q).powf(d / (2.0 * q));
    let mags = conv.magnitudes();
    let mut best = (0.0, 0);
    for (i, &m) in mags.iter().enumerate() {
        if m > best.0 {
            best = (m, i);
        }
    }
    Ok((best.0 / dual, best.1))
}

fn window(f: &SpectralField, center: usize, lambda: f64) -> Result<SpectralField> {
    let g = f.grid().clone();
    let x = g.position(center);
    let mut values = f.to_physical()?;
    for idx in 0..g.len() {
        let r = g.displacement(&g.position(idx), &x);
        let dist = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = psi(dist / (3.0 * lambda));
        for comp in values.iter_mut() {
            comp[idx] *= w;
        }
    }
    SpectralField::from_physical(&g, &values)
}

fn extract_one(f: &SpectralField, config: &ExtractConfig) -> Result<(SnapshotExtraction, Vec<SpectralField>)> {
    let grid = f.grid().clone();
    let (lo, hi) = representable_scales(&grid);
    let scales = dyadic_scales(lo, hi);
    if scales.is_empty() {
        return Err(Error::Representability(format!("no dyadic scale in [{lo:e}, {hi:e}]")));
    }
    let (s, r) = remainder_exponents(grid.dim(), config.p);
    let norm = f.lp_norm(config.p)?;
    let mut residual = f.clone();
    let mut pieces = Vec::new();
    let mut fields = Vec::new();
    let mut ratios = Vec::new();
    if norm == 0.0 {
        return Ok((SnapshotExtraction { norm, pieces, residual_ratios: ratios }, fields));
    }
    while pieces.len() < config.max_profiles {
        let ratio = besov_norm(&residual, s, r, r)?.value / norm;
        if ratio < config.residual_threshold {
            break;
        }
        let mut best = (0.0, 0usize, scales[0]);
        for &lambda in &scales {
            let (score, idx) = best_point(&residual, lambda, config.p)?;
            if score > best.0 {
                best = (score, idx, lambda);
            }
        }
        let (score, idx, lambda) = best;
        if score < config.min_fraction * norm {
            break;
        }
        let piece = window(&residual, idx, lambda)?;
        residual = residual.sub(&piece)?;
        let pos = grid.position(idx);
        let pt = grid.point(idx);
        pieces.push(Piece {
            scale: lambda,
            core: pos[..grid.dim()].to_vec(),
            score,
            lattice_core: pt[..grid.dim()].iter().map(|&v| v as i64).collect(),
        });
        fields.push(piece);
        ratios.push(besov_norm(&residual, s, r, r)?.value / norm);
    }
    Ok((
        SnapshotExtraction {
            norm,
            pieces,
            residual_ratios: ratios,
        },
        fields,
    ))
}

/// Greedy extraction of scales and cores along a sequence of snapshots.
///
/// Each snapshot is scanned over dyadic scales in the representable range;
/// the point and scale maximizing the normalized Gaussian average are taken
/// as a profile, a window of radius about `4.5 λ` around it is removed, and
/// the search repeats on the residual.
pub fn greedy_extract(snapshots: &[SpectralField], config: &ExtractConfig) -> Result<Extraction> {
    if !(config.p > 1.0 && config.p.is_finite()) {
        return Err(Error::Domain(format!("p must lie in (1, ∞), got {}", config.p)));
    }
    if snapshots.is_empty() {
        return Err(Error::Domain("no snapshots".into()));
    }
    let mut results = Vec::with_capacity(snapshots.len());
    let mut fields = Vec::with_capacity(snapshots.len());
    for f in snapshots {
        f.grid().same_as(snapshots[0].grid())?;
        let (r, pieces) = extract_one(f, config)?;
        results.push(r);
        fields.push(pieces);
    }
    let found = results.iter().map(|r| r.pieces.len()).min().unwrap_or(0);
    let notice = (found < config.max_profiles).then(|| {
        format!(
            "found {found} of {} requested profiles on every snapshot",
            config.max_profiles
        )
    });
    let d = snapshots[0].dim() as f64;
    let last = results.len() - 1;
    let first_tail = results.len().saturating_sub(config.tail.max(1));
    let mut profiles = Vec::with_capacity(found);
    for j in 0..found {
        let scales: Vec<f64> = results.iter().map(|r| r.pieces[j].scale).collect();
        let cores: Vec<Vec<f64>> = results.iter().map(|r| r.pieces[j].core.clone()).collect();
        let target = scales[last];
        let mut sum: Option<SpectralField> = None;
        let mut count = 0usize;
        for i in first_tail..=last {
            if scales[i] != target {
                continue;
            }
            let shift: Vec<i64> = results[i].pieces[j].lattice_core.iter().map(|v| -v).collect();
            let centered = fields[i][j].translated(&shift).scaled(target.powf(d / config.p));
            match sum.as_mut() {
                Some(acc) => acc.axpy(1.0, &centered)?,
                None => sum = Some(centered),
            }
            count += 1;
        }
        profiles.push(ExtractedProfile {
            scales,
            cores,
            surrogate: sum.map(|s| s.scaled(1.0 / count as f64)),
            surrogate_samples: count,
        });
    }
    Ok(Extraction {
        snapshots: results,
        profiles,
        notice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::profile::{Frame, ProfileShape, rescaled_profile};

    #[test]
    fn dyadic_range() {
        assert_eq!(dyadic_scales(0.3, 2.1), vec![0.5, 1.0, 2.0]);
        assert!(dyadic_scales(0.6, 0.9).is_empty());
    }

    #[test]
    fn recovers_two_separated_bumps() {
        let g = GridSpec::new(2, 128).build().unwrap();
        let frame = Frame::Lp { p: 4.0 };
        let shape = ProfileShape::Gaussian { amplitude: 1.0 };
        let a = rescaled_profile(&g, &shape, 0.25, &[1.5, 1.5], frame).unwrap();
        let b = rescaled_profile(&g, &shape, 0.5, &[4.5, 4.0], frame).unwrap();
        let f = a.add(&b).unwrap();
        let config = ExtractConfig {
            max_profiles: 2,
            ..ExtractConfig::default()
        };
        let out = greedy_extract(&[f], &config).unwrap();
        let pieces = &out.snapshots[0].pieces;
        assert_eq!(pieces.len(), 2);
        let mut scales: Vec<f64> = pieces.iter().map(|p| p.scale).collect();
        scales.sort_by(f64::total_cmp);
        assert_eq!(scales, vec![0.25, 0.5]);
        for p in pieces {
            let want = if p.scale == 0.25 { [1.5, 1.5] } else { [4.5, 4.0] };
            let dist = g.displacement(&p.core, &want);
            assert!(dist.iter().all(|v| v.abs() <= g.spacing()));
        }
        assert_eq!(out.profiles.len(), 2);
        assert!(out.notice.is_none());
    }

    #[test]
    fn pure_noise_yields_no_profiles() {
        let g = GridSpec::new(2, 64).build().unwrap();
        let noise = crate::initial::random_divfree(&g, 7, 1.0, 0.0, 12.0, 21.0).unwrap();
        let out = greedy_extract(&[noise], &ExtractConfig::default()).unwrap();
        assert!(out.snapshots[0].pieces.is_empty());
        assert!(out.notice.is_some());
    }

    #[test]
    fn zero_data_reports_notice() {
        let g = GridSpec::new(2, 32).build().unwrap();
        let z = SpectralField::zeros(&g, crate::FieldKind::Real);
        let out = greedy_extract(&[z], &ExtractConfig::default()).unwrap();
        assert!(out.profiles.is_empty());
        assert!(out.notice.is_some());
    }
}
