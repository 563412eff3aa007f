//! PCA-based covariate-shift diagnostics: top-k principal components of the
//! combined source∪target inputs, 2D projections, and a scale-free domain
//! gap (centroid distance over pooled spread).
//!
//! The fit is a deterministic block subspace iteration with Rayleigh–Ritz
//! extraction; matvecs go through the data matrix so the d×d covariance is
//! never formed. Sample covariance uses the 1/(n−1) convention.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::{Dataset, DomainTag};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Mean, orthonormal components (descending variance), and the variance each
/// component explains.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// One projected image: domain, label, and its first two coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub domain: DomainTag,
    pub label: u8,
    pub pc1: f64,
    pub pc2: f64,
}

const MAX_ITERATIONS: usize = 2000;
const START_SEED: u64 = 0x5043_4131;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalizes `block` in place (two MGS passes). Columns that vanish
/// are replaced by canonical basis vectors orthogonalized against the rest,
/// so the block always stays full-rank and the procedure deterministic.
fn orthonormalize(block: &mut [Vec<f64>]) {
    let d = block[0].len();
    for j in 0..block.len() {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = dot(&block[j], &block[i]);
                let (head, tail) = block.split_at_mut(j);
                for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= proj * y;
                }
            }
        }
        let norm = libm::sqrt(dot(&block[j], &block[j]));
        if norm > 1e-12 {
            for x in &mut block[j] {
                *x /= norm;
            }
            continue;
        }
        // Degenerate direction: fall back to the first canonical vector that
        // survives orthogonalization.
        'basis: for e in 0..d {
            let mut cand = vec![0.0; d];
            cand[e] = 1.0;
            for i in 0..j {
                let proj = dot(&cand, &block[i]);
                for (x, y) in cand.iter_mut().zip(&block[i]) {
                    *x -= proj * y;
                }
            }
            let norm = libm::sqrt(dot(&cand, &cand));
            if norm > 1e-6 {
                for x in &mut cand {
                    *x /= norm;
                }
                block[j] = cand;
                break 'basis;
            }
        }
    }
}

/// y = C·q through the data matrix: C = (1/(n−1))·Σ (x−μ)(x−μ)ᵀ.
fn apply_covariance(rows: &[Vec<f64>], mean: &[f64], q: &[f64]) -> Vec<f64> {
    let d = mean.len();
    let mu_dot = dot(mean, q);
    let mut acc = vec![0.0f64; d];
    let mut s_sum = 0.0;
    for row in rows {
        let s = dot(row, q) - mu_dot;
        s_sum += s;
        for (a, x) in acc.iter_mut().zip(row) {
            *a += s * x;
        }
    }
    let inv = 1.0 / (rows.len() - 1) as f64;
    acc.iter()
        .zip(mean)
        .map(|(a, m)| (a - s_sum * m) * inv)
        .collect()
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix (row-major).
/// Returns (eigenvalues, eigenvectors as columns in `v[j][i]`... indexed
/// `v[col][row]`), unsorted.
fn jacobi_eig(a: &mut [f64], b: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v: Vec<Vec<f64>> = (0..b)
        .map(|j| {
            let mut col = vec![0.0; b];
            col[j] = 1.0;
            col
        })
        .collect();
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..b {
            for q in (p + 1)..b {
                off += a[p * b + q] * a[p * b + q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..b {
            for q in (p + 1)..b {
                let apq = a[p * b + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q * b + q] - a[p * b + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for i in 0..b {
                    let aip = a[i * b + p];
                    let aiq = a[i * b + q];
                    a[i * b + p] = c * aip - s * aiq;
                    a[i * b + q] = s * aip + c * aiq;
                }
                for i in 0..b {
                    let api = a[p * b + i];
                    let aqi = a[q * b + i];
                    a[p * b + i] = c * api - s * aqi;
                    a[q * b + i] = s * api + c * aqi;
                }
                for col in &mut v {
                    let vp = col[p];
                    let vq = col[q];
                    col[p] = c * vp - s * vq;
                    col[q] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..b).map(|i| a[i * b + i]).collect();
    (values, v)
}

/// First coordinate above noise decides the sign.
fn fix_sign(component: &mut [f64]) {
    for &c in component.iter() {
        if c.abs() > 1e-12 {
            if c < 0.0 {
                for x in component.iter_mut() {
                    *x = -*x;
                }
            }
            return;
        }
    }
}

/// Fits the top-k principal components of `rows` (flattened images).
pub fn fit_pca(rows: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::ImageGeometry {
                index: i,
                expected: (d, 1, 1),
                got: (row.len(), 1, 1),
            });
        }
    }
    if k == 0 || d == 0 {
        return Err(Error::InvalidConfig {
            what: "fit_pca needs k >= 1 and nonempty vectors",
        });
    }
    let max_k = d.min(n - 1);
    if k > max_k {
        return Err(Error::RankExceeded { k, max: max_k });
    }

    let mut mean = vec![0.0f64; d];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let b = (k + 4).min(max_k);
    let mut rng = stream_rng(START_SEED, &[]);
    let mut q: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut q);

    for _iter in 0..MAX_ITERATIONS {
        let z: Vec<Vec<f64>> = q.iter().map(|col| apply_covariance(rows, &mean, col)).collect();
        // Rayleigh–Ritz on span(q): T = Qᵀ C Q = Qᵀ Z.
        let mut t = vec![0.0f64; b * b];
        for i in 0..b {
            for j in 0..b {
                t[i * b + j] = dot(&q[i], &z[j]);
            }
        }
        // Symmetrize to wash out matvec rounding.
        for i in 0..b {
            for j in (i + 1)..b {
                let s = 0.5 * (t[i * b + j] + t[j * b + i]);
                t[i * b + j] = s;
                t[j * b + i] = s;
            }
        }
        let (values, vectors) = jacobi_eig(&mut t, b);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap().then(i.cmp(&j)));

        // Ritz pairs: v = Q·u, C·v = Z·u exactly (C is linear), so the
        // residual needs no extra matvecs.
        let scale = values[order[0]].abs().max(1e-300);
        let mut converged = true;
        let mut ritz: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let u = &vectors[idx];
            let lambda = values[idx];
            let mut v = vec![0.0f64; d];
            let mut cv = vec![0.0f64; d];
            for (j, coeff) in u.iter().enumerate() {
                for i in 0..d {
                    v[i] += coeff * q[j][i];
                    cv[i] += coeff * z[j][i];
                }
            }
            let mut res = 0.0f64;
            for i in 0..d {
                let r = cv[i] - lambda * v[i];
                res += r * r;
            }
            if libm::sqrt(res) > 1e-11 * scale.max(1.0) {
                converged = false;
            }
            ritz.push((lambda, v));
        }
        if converged {
            let mut components = Vec::with_capacity(k);
            let mut explained = Vec::with_capacity(k);
            for (lambda, mut v) in ritz {
                let norm = libm::sqrt(dot(&v, &v));
                if norm > 0.0 {
                    for x in &mut v {
                        *x /= norm;
                    }
                }
                fix_sign(&mut v);
                components.push(v);
                explained.push(lambda.max(0.0));
            }
            return Ok(PcaModel {
                mean,
                components,
                explained_variance: explained,
            });
        }
        q = z;
        orthonormalize(&mut q);
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// ⟨x − mean, component_i⟩ for every component.
pub fn project_vec(model: &PcaModel, flat: &[f64]) -> Result<Vec<f64>> {
    if flat.len() != model.dim() {
        return Err(Error::BadLength {
            expected: model.dim(),
            got: flat.len(),
        });
    }
    let centered: Vec<f64> = flat.iter().zip(&model.mean).map(|(x, m)| x - m).collect();
    Ok(model.components.iter().map(|c| dot(&centered, c)).collect())
}

/// Projects every image of a dataset onto (pc1, pc2), carrying domain and
/// label through for the scatter artifacts.
pub fn project_dataset(model: &PcaModel, data: &Dataset) -> Result<Vec<ProjectionRow>> {
    if model.k() < 2 {
        return Err(Error::InvalidConfig {
            what: "projection table needs at least two components",
        });
    }
    let mut rows = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let coords = project_vec(model, &data.image(i).flatten())?;
        rows.push(ProjectionRow {
            domain: data.domain(),
            label: data.label(i),
            pc1: coords[0],
            pc2: coords[1],
        });
    }
    Ok(rows)
}

/// Euclidean distance between the two domain centroids in (pc1, pc2),
/// divided by the pooled standard deviation (root mean squared distance of
/// points from their own centroid). Scale-free: rescaling every projection
/// leaves it unchanged. Identical clouds give exactly 0.
pub fn domain_gap(table: &[ProjectionRow]) -> Result<f64> {
    let mut sums = [[0.0f64; 2]; 2];
    let mut counts = [0usize; 2];
    for row in table {
        let d = match row.domain {
            DomainTag::Source => 0,
            DomainTag::Target => 1,
        };
        sums[d][0] += row.pc1;
        sums[d][1] += row.pc2;
        counts[d] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleDomain);
    }
    let centroids = [
        [sums[0][0] / counts[0] as f64, sums[0][1] / counts[0] as f64],
        [sums[1][0] / counts[1] as f64, sums[1][1] / counts[1] as f64],
    ];
    let dx = centroids[0][0] - centroids[1][0];
    let dy = centroids[0][1] - centroids[1][1];
    let dist = libm::sqrt(dx * dx + dy * dy);
    if dist == 0.0 {
        return Ok(0.0);
    }
    let mut spread = 0.0;
    for row in table {
        let d = match row.domain {
            DomainTag::Source => 0,
            DomainTag::Target => 1,
        };
        let ex = row.pc1 - centroids[d][0];
        let ey = row.pc2 - centroids[d][1];
        spread += ex * ex + ey * ey;
    }
    let pooled = libm::sqrt(spread / table.len() as f64);
    Ok(dist / pooled)
}
