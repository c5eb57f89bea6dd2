use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::irt::IrtSpec;
use super::recovery::ScoreModel;
use crate::error::{Error, Result};
use crate::ratings::{Rating, RatingsMatrix};
use crate::sample::SampleSet;

/// Scores for a recovery study: i.i.d. uniform on `[0, 1]`, or evenly spaced
/// from 0 to 1.
pub fn scores_from_model(model: ScoreModel, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    match model {
        ScoreModel::UniformRandom => (0..n).map(|_| rng.random::<f64>()).collect(),
        ScoreModel::UniformSpaced => match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        },
    }
}

/// `Y = s e^T - e s^T + eps (E - E^T) / 2` with `E` standard normal.
///
/// The noise is skew-symmetrised so `Y` is exactly skew; each off-diagonal
/// entry carries noise with standard deviation `eps / sqrt(2)`.
pub fn gen_pairwise_from_scores(
    s: &[f64],
    noise_eps: f64,
    rng: &mut impl Rng,
) -> Result<DMatrix<f64>> {
    if !(noise_eps >= 0.0 && noise_eps.is_finite()) {
        return Err(Error::domain(format!("noise level must be >= 0, got {noise_eps}")));
    }
    let n = s.len();
    let mut y = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let noise = if noise_eps > 0.0 {
                let upper: f64 = StandardNormal.sample(rng);
                let lower: f64 = StandardNormal.sample(rng);
                noise_eps * (upper - lower) / 2.0
            } else {
                0.0
            };
            let v = s[i] - s[j] + noise;
            y[(i, j)] = v;
            y[(j, i)] = -v;
        }
    }
    Ok(y)
}

/// Samples `m` unordered off-diagonal pairs of the skew matrix `y` uniformly
/// without replacement and returns them skew-closed (`2m` oriented pairs).
pub fn sample_entries(y: &DMatrix<f64>, m: usize, rng: &mut impl Rng) -> Result<SampleSet> {
    let n = y.nrows();
    if !y.is_square() {
        return Err(Error::domain("sample_entries needs a square matrix"));
    }
    let total = n * n.saturating_sub(1) / 2;
    if m == 0 {
        return Err(Error::domain("cannot sample zero entries: the constraint set would be empty"));
    }
    if m > total {
        return Err(Error::domain(format!(
            "cannot sample {m} pairs from {total} off-diagonal pairs"
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if y[(i, j)] != -y[(j, i)] {
                return Err(Error::domain(format!("matrix is not skew-symmetric at ({i}, {j})")));
            }
        }
    }
    let mut chosen = index::sample(rng, total, m).into_vec();
    chosen.sort_unstable();
    let mut entries = Vec::with_capacity(m);
    let mut next = chosen.into_iter().peekable();
    let mut linear = 0;
    'rows: for i in 0..n {
        for j in i + 1..n {
            match next.peek() {
                None => break 'rows,
                Some(&l) if l == linear => {
                    entries.push((i, j, y[(i, j)]));
                    next.next();
                }
                _ => {}
            }
            linear += 1;
        }
    }
    SampleSet::from_upper(n, entries)
}

/// Five-level rating quantiser: `< 1.5 -> 1`, `[1.5, 2.5) -> 2`, ..., `>= 4.5 -> 5`.
pub fn levels(x: f64) -> f64 {
    match x {
        x if x < 1.5 => 1.0,
        x if x < 2.5 => 2.0,
        x if x < 3.5 => 3.0,
        x if x < 4.5 => 4.0,
        _ => 5.0,
    }
}

/// Ratings drawn from the item-response model plus the hidden parameters.
#[derive(Debug, Clone)]
pub struct IrtData {
    pub ratings: RatingsMatrix,
    /// True item qualities `t_j`.
    pub item_quality: Vec<f64>,
    /// Per-user centers `a_i`.
    pub centers: Vec<f64>,
    /// Per-user sensitivities `b_i`.
    pub sensitivities: Vec<f64>,
}

/// `R_ij = levels(a_i + b_i t_j + eps z_ij)` with `a ~ N(3, 1)`, `b ~ N(0.5, 0.5)`,
/// `t ~ N(0.1, 1)`, `z ~ N(0, 1)`. Each cell is observed independently with
/// probability `avg_ratings_per_user / num_items`.
pub fn gen_irt_ratings(spec: &IrtSpec, rng: &mut impl Rng) -> Result<IrtData> {
    spec.validate()?;
    let center = Normal::new(3.0, 1.0).expect("valid");
    let sensitivity = Normal::new(0.5, 0.5).expect("valid");
    let quality = Normal::new(0.1, 1.0).expect("valid");

    let centers: Vec<f64> = (0..spec.num_users).map(|_| center.sample(rng)).collect();
    let sensitivities: Vec<f64> = (0..spec.num_users).map(|_| sensitivity.sample(rng)).collect();
    let item_quality: Vec<f64> = (0..spec.num_items).map(|_| quality.sample(rng)).collect();

    let presence = spec.avg_ratings_per_user / spec.num_items as f64;
    let ratings = rate_items(&centers, &sensitivities, &item_quality, spec.noise_eps, presence, rng)?;
    Ok(IrtData {
        ratings,
        item_quality,
        centers,
        sensitivities,
    })
}

/// Rates every (user, item) cell independently with probability `presence`
/// as `levels(centers[u] + sensitivities[u] * quality[j] + noise_eps * z)`.
pub fn rate_items(
    centers: &[f64],
    sensitivities: &[f64],
    quality: &[f64],
    noise_eps: f64,
    presence: f64,
    rng: &mut impl Rng,
) -> Result<RatingsMatrix> {
    if centers.len() != sensitivities.len() {
        return Err(Error::DimensionMismatch {
            expected: centers.len(),
            got: sensitivities.len(),
        });
    }
    let mut entries = Vec::new();
    for (user, (&a, &b)) in centers.iter().zip(sensitivities).enumerate() {
        for (item, &t) in quality.iter().enumerate() {
            let observed = rng.random::<f64>() < presence;
            let z: f64 = StandardNormal.sample(rng);
            if observed {
                entries.push(Rating {
                    voter: user,
                    item,
                    value: levels(a + b * t + noise_eps * z),
                });
            }
        }
    }
    RatingsMatrix::new(centers.len(), quality.len(), entries)
}
