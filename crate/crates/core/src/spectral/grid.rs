use std::f64::consts::PI;

use crate::{Error, Result, Vec3};

/// Index of the real harmonic `Y_{ℓm}`, `−ℓ ≤ m ≤ ℓ`, in a coefficient vector.
#[inline]
pub fn coeff_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Inverse of [`coeff_index`].
pub fn index_lm(i: usize) -> (usize, i64) {
    let l = (i as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= i { l + 1 } else { l };
    (l, i as i64 - (l * l + l) as i64)
}

/// Number of coefficients of a field band-limited to `band`.
#[inline]
pub fn n_coeffs(band: usize) -> usize {
    (band + 1) * (band + 1)
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Gauss–Legendre nodes on `[−1, 1]` in decreasing order, with weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Values and Mercator derivatives `∂_s = sinθ ∂_θ`, `∂_λ` of a synthesised
/// field at every node.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub f: Vec<f64>,
    pub s: Vec<f64>,
    pub l: Vec<f64>,
    pub ss: Vec<f64>,
    pub sl: Vec<f64>,
    pub ll: Vec<f64>,
}

/// Gauss–Legendre × equispaced-longitude collocation grid on the unit sphere.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    band: usize,
    max_band: usize,
    pub nlat: usize,
    pub nlon: usize,
    /// `cos θ_j`, decreasing (north to south).
    pub cos_theta: Vec<f64>,
    pub sin_theta: Vec<f64>,
    pub colat_weights: Vec<f64>,
    pub lon: Vec<f64>,
    pub unit_points: Vec<Vec3>,
    pub node_weights: Vec<f64>,
    // per latitude, triangular (ℓ, m ≥ 0): P̄_{ℓm} and ∂_s P̄_{ℓm}
    plm: Vec<Vec<f64>>,
    slm: Vec<Vec<f64>>,
    cos_m: Vec<Vec<f64>>,
    sin_m: Vec<Vec<f64>>,
}

impl SphereGrid {
    /// Dealiased grid for band limit `band ≥ 4`: `⌈3L/2⌉ + 1` latitudes and
    /// `3L + 1` longitudes.
    pub fn new(band: usize) -> Result<Self> {
        if band < 4 {
            return Err(Error::Configuration(format!(
                "band limit L must be at least 4, got {band}"
            )));
        }
        let nlat = (3 * band).div_ceil(2) + 1;
        let nlon = 3 * band + 1;
        Ok(Self::with_sizes(band, nlat, nlon))
    }

    fn with_sizes(band: usize, nlat: usize, nlon: usize) -> Self {
        let max_band = (nlat - 1).min((nlon - 1) / 2);
        let (x, w) = gauss_legendre(nlat);
        let sin_theta: Vec<f64> = x.iter().map(|c| (1.0 - c * c).sqrt()).collect();
        let lon: Vec<f64> = (0..nlon)
            .map(|k| 2.0 * PI * k as f64 / nlon as f64)
            .collect();
        let mut unit_points = Vec::with_capacity(nlat * nlon);
        let mut node_weights = Vec::with_capacity(nlat * nlon);
        for j in 0..nlat {
            for &lam in &lon {
                unit_points.push(Vec3::new(
                    sin_theta[j] * lam.cos(),
                    sin_theta[j] * lam.sin(),
                    x[j],
                ));
                node_weights.push(w[j] * 2.0 * PI / nlon as f64);
            }
        }
        let plm: Vec<Vec<f64>> = (0..nlat)
            .map(|j| legendre_table(max_band, x[j], sin_theta[j]))
            .collect();
        let slm = plm
            .iter()
            .enumerate()
            .map(|(j, p)| mercator_derivative_table(max_band, x[j], p))
            .collect();
        let cos_m = (0..=max_band)
            .map(|m| lon.iter().map(|l| (m as f64 * l).cos()).collect())
            .collect();
        let sin_m = (0..=max_band)
            .map(|m| lon.iter().map(|l| (m as f64 * l).sin()).collect())
            .collect();
        SphereGrid {
            band,
            max_band,
            nlat,
            nlon,
            cos_theta: x,
            sin_theta,
            colat_weights: w,
            lon,
            unit_points,
            node_weights,
            plm,
            slm,
            cos_m,
            sin_m,
        }
    }

    /// Band limit `L` of solution fields.
    pub fn band(&self) -> usize {
        self.band
    }

    /// Largest band the grid analyses exactly.
    pub fn max_band(&self) -> usize {
        self.max_band
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Latitude index of a node.
    #[inline]
    pub fn lat_of(&self, node: usize) -> usize {
        node / self.nlon
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Quadrature `∫_{S²} f`, summed in node order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .zip(&self.node_weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Real harmonic coefficients up to `band` by quadrature.
    pub fn analyze(&self, values: &[f64], band: usize) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        if band > self.max_band {
            return Err(Error::Configuration(format!(
                "analysis band {band} exceeds grid capacity {}",
                self.max_band
            )));
        }
        let mut out = vec![0.0; n_coeffs(band)];
        let mut cm = vec![0.0; band + 1];
        let mut sm = vec![0.0; band + 1];
        for j in 0..self.nlat {
            let row = &values[j * self.nlon..(j + 1) * self.nlon];
            let wj = self.colat_weights[j] * 2.0 * PI / self.nlon as f64;
            for m in 0..=band {
                let (mut c, mut s) = (0.0, 0.0);
                for k in 0..self.nlon {
                    c += row[k] * self.cos_m[m][k];
                    s += row[k] * self.sin_m[m][k];
                }
                cm[m] = c * wj;
                sm[m] = s * wj;
            }
            let p = &self.plm[j];
            for l in 0..=band {
                out[coeff_index(l, 0)] += p[tri(l, 0)] * cm[0];
                for m in 1..=l {
                    let pv = p[tri(l, m)] * std::f64::consts::SQRT_2;
                    out[coeff_index(l, m as i64)] += pv * cm[m];
                    out[coeff_index(l, -(m as i64))] += pv * sm[m];
                }
            }
        }
        Ok(out)
    }

    fn band_of(&self, n: usize) -> Result<usize> {
        let b = (n as f64).sqrt().round() as usize;
        if b == 0 || b * b != n {
            return Err(Error::Shape {
                expected: n_coeffs(b.max(1) - 1),
                got: n,
            });
        }
        if b - 1 > self.max_band {
            return Err(Error::Configuration(format!(
                "synthesis band {} exceeds grid capacity {}",
                b - 1,
                self.max_band
            )));
        }
        Ok(b - 1)
    }

    /// Collocation values of a coefficient vector.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let band = self.band_of(coeffs.len())?;
        let mut out = vec![0.0; self.len()];
        let mut a = vec![0.0; band + 1];
        let mut b = vec![0.0; band + 1];
        for j in 0..self.nlat {
            let p = &self.plm[j];
            for m in 0..=band {
                let (mut ca, mut cb) = (0.0, 0.0);
                for l in m..=band {
                    let pv = p[tri(l, m)];
                    if m == 0 {
                        ca += pv * coeffs[coeff_index(l, 0)];
                    } else {
                        ca += pv * coeffs[coeff_index(l, m as i64)];
                        cb += pv * coeffs[coeff_index(l, -(m as i64))];
                    }
                }
                let f = if m == 0 {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                };
                a[m] = ca * f;
                b[m] = cb * f;
            }
            for k in 0..self.nlon {
                let mut v = 0.0;
                for m in 0..=band {
                    v += a[m] * self.cos_m[m][k] + b[m] * self.sin_m[m][k];
                }
                out[j * self.nlon + k] = v;
            }
        }
        Ok(out)
    }

    /// Values with first and second Mercator derivatives.
    pub fn synthesize_derivatives(&self, coeffs: &[f64]) -> Result<Derivatives> {
        let band = self.band_of(coeffs.len())?;
        let n = self.len();
        let mut d = Derivatives {
            f: vec![0.0; n],
            s: vec![0.0; n],
            l: vec![0.0; n],
            ss: vec![0.0; n],
            sl: vec![0.0; n],
            ll: vec![0.0; n],
        };
        // per m: cosine/sine parts of P, ∂_s P and ∂_ss P sums
        let mut acc = vec![[0.0f64; 6]; band + 1];
        for j in 0..self.nlat {
            let p = &self.plm[j];
            let sp = &self.slm[j];
            let s2 = self.sin_theta[j] * self.sin_theta[j];
            for m in 0..=band {
                let mut t = [0.0; 6];
                for l in m..=band {
                    let pv = p[tri(l, m)];
                    let sv = sp[tri(l, m)];
                    let ssv = ((m * m) as f64 - (l * (l + 1)) as f64 * s2) * pv;
                    let (ac, as_) = if m == 0 {
                        (coeffs[coeff_index(l, 0)], 0.0)
                    } else {
                        (
                            coeffs[coeff_index(l, m as i64)],
                            coeffs[coeff_index(l, -(m as i64))],
                        )
                    };
                    t[0] += pv * ac;
                    t[1] += pv * as_;
                    t[2] += sv * ac;
                    t[3] += sv * as_;
                    t[4] += ssv * ac;
                    t[5] += ssv * as_;
                }
                let f = if m == 0 {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                };
                for v in t.iter_mut() {
                    *v *= f;
                }
                acc[m] = t;
            }
            for k in 0..self.nlon {
                let idx = j * self.nlon + k;
                let mut o = [0.0; 6];
                for (m, t) in acc.iter().enumerate() {
                    let c = self.cos_m[m][k];
                    let s = self.sin_m[m][k];
                    let mf = m as f64;
                    o[0] += t[0] * c + t[1] * s;
                    o[1] += t[2] * c + t[3] * s;
                    o[2] += mf * (t[1] * c - t[0] * s);
                    o[3] += t[4] * c + t[5] * s;
                    o[4] += mf * (t[3] * c - t[2] * s);
                    o[5] -= mf * mf * (t[0] * c + t[1] * s);
                }
                d.f[idx] = o[0];
                d.s[idx] = o[1];
                d.l[idx] = o[2];
                d.ss[idx] = o[3];
                d.sl[idx] = o[4];
                d.ll[idx] = o[5];
            }
        }
        Ok(d)
    }

    /// Collocation values of the real harmonic `Y_{ℓm}`.
    pub fn harmonic(&self, l: usize, m: i64) -> Vec<f64> {
        let mut c = vec![0.0; n_coeffs(l)];
        c[coeff_index(l, m)] = 1.0;
        self.synthesize(&c).expect("harmonic within grid capacity")
    }
}

/// Orthonormal associated Legendre functions `P̄_{ℓm}(cos θ)`, `0 ≤ m ≤ ℓ ≤ lmax`,
/// without the Condon–Shortley phase, normalised so that `∫ (P̄_{ℓm} cos mλ)² = ½`
/// for `m > 0` and `∫ P̄_{ℓ0}² = 1`.
fn legendre_table(lmax: usize, x: f64, s: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri(lmax, lmax) + 1];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=lmax {
        p[tri(m, m)] = p[tri(m - 1, m - 1)] * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
    }
    for m in 0..lmax {
        p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[tri(m, m)];
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// `∂_s P̄_{ℓm} = ℓ x P̄_{ℓm} − √((2ℓ+1)(ℓ²−m²)/(2ℓ−1)) P̄_{ℓ−1,m}`.
fn mercator_derivative_table(lmax: usize, x: f64, p: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; p.len()];
    for l in 0..=lmax {
        for m in 0..=l {
            let lf = l as f64;
            let mut v = lf * x * p[tri(l, m)];
            if l > m {
                let mf = m as f64;
                v -= ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
                    * p[tri(l - 1, m)];
            }
            d[tri(l, m)] = v;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn index_round_trip() {
        for i in 0..200 {
            let (l, m) = index_lm(i);
            assert!(m.unsigned_abs() as usize <= l);
            assert_eq!(coeff_index(l, m), i);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert_relative_eq!(q, exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_sizes_and_interior_nodes() {
        let g = SphereGrid::new(16).unwrap();
        assert_eq!((g.nlat, g.nlon, g.max_band()), (25, 49, 24));
        assert!(g.sin_theta.iter().all(|s| *s > 0.0));
        assert!(SphereGrid::new(3).is_err());
    }

    #[test]
    fn quadrature_basics() {
        let g = SphereGrid::new(8).unwrap();
        let one = vec![1.0; g.len()];
        assert_relative_eq!(g.integrate(&one), 4.0 * PI, epsilon = 1e-12);
        for i in 0..3 {
            let zi: Vec<f64> = g.unit_points.iter().map(|q| q[i]).collect();
            assert!(g.integrate(&zi).abs() < 1e-12);
            for j in 0..3 {
                let zij: Vec<f64> = g.unit_points.iter().map(|q| q[i] * q[j]).collect();
                let exact = if i == j { 4.0 * PI / 3.0 } else { 0.0 };
                assert!((g.integrate(&zij) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonics_are_orthonormal_to_degree_2l() {
        let g = SphereGrid::new(8).unwrap();
        let n = n_coeffs(8);
        let ys: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let (l, m) = index_lm(i);
                g.harmonic(l, m)
            })
            .collect();
        for a in 0..n {
            for b in a..n {
                let prod: Vec<f64> = ys[a].iter().zip(&ys[b]).map(|(x, y)| x * y).collect();
                let exact = if a == b { 1.0 } else { 0.0 };
                assert!((g.integrate(&prod) - exact).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn round_trip_random_field() {
        let g = SphereGrid::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c: Vec<f64> = (0..n_coeffs(16))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let v = g.synthesize(&c).unwrap();
        let c2 = g.analyze(&v, 16).unwrap();
        for (a, b) in c.iter().zip(&c2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mercator_derivatives_match_differences() {
        // f = x z + y² in ambient coordinates restricted to the sphere
        let g = SphereGrid::new(8).unwrap();
        let f = |t: f64, l: f64| {
            let (st, ct) = (t.sin(), t.cos());
            st * l.cos() * ct + (st * l.sin()).powi(2)
        };
        let v: Vec<f64> = g
            .unit_points
            .iter()
            .map(|q| q.x * q.z + q.y * q.y)
            .collect();
        let d = g
            .synthesize_derivatives(&g.analyze(&v, 8).unwrap())
            .unwrap();
        let h = 1e-4;
        for node in [3, 40, 100, 200] {
            let j = g.lat_of(node);
            let k = node % g.nlon;
            let (t, l, st) = (g.cos_theta[j].acos(), g.lon[k], g.sin_theta[j]);
            let ft = (f(t + h, l) - f(t - h, l)) / (2.0 * h);
            let fl = (f(t, l + h) - f(t, l - h)) / (2.0 * h);
            let fll = (f(t, l + h) - 2.0 * f(t, l) + f(t, l - h)) / (h * h);
            let ftl = (f(t + h, l + h) - f(t + h, l - h) - f(t - h, l + h) + f(t - h, l - h))
                / (4.0 * h * h);
            let ftt = (f(t + h, l) - 2.0 * f(t, l) + f(t - h, l)) / (h * h);
            assert_relative_eq!(d.f[node], f(t, l), epsilon = 1e-12);
            assert_relative_eq!(d.s[node], st * ft, epsilon = 1e-7);
            assert_relative_eq!(d.l[node], fl, epsilon = 1e-7);
            assert_relative_eq!(d.ll[node], fll, epsilon = 1e-5);
            assert_relative_eq!(d.sl[node], st * ftl, epsilon = 1e-5);
            // ∂_ss = sinθ ∂_θ (sinθ ∂_θ) = sin²θ ∂_θθ + sinθ cosθ ∂_θ
            assert_relative_eq!(
                d.ss[node],
                st * st * ftt + st * t.cos() * ft,
                epsilon = 1e-5
            );
        }
    }
}
