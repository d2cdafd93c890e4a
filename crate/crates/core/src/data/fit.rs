use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::ln_gamma;

use super::grid::Grid;
use crate::capacity::ProbabilityVector;
use crate::error::{Error, Result};

pub const MIN_OBSERVATIONS: usize = 10;
pub const NU_RANGE: (f64, f64) = (2.1, 100.0);
const EM_MAX_ITER: usize = 500;
/// EM stops once the mean log-likelihood per observation improves by less.
const EM_TOL: f64 = 1e-9;
const NU_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    StudentT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedDistribution {
    pub family: Family,
    /// Mean (normal) or location (t).
    pub mu: f64,
    /// Standard deviation (normal) or scale (t).
    pub sigma: f64,
    pub nu: Option<f64>,
    pub log_likelihood: f64,
    /// False when an inner EM run hit its iteration cap; the fit is the
    /// best found.
    pub converged: bool,
    pub window: Option<usize>,
}

impl FittedDistribution {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        check_params(mu, sigma, None)?;
        Ok(Self {
            family: Family::Normal,
            mu,
            sigma,
            nu: None,
            log_likelihood: f64::NAN,
            converged: true,
            window: None,
        })
    }

    pub fn student_t(mu: f64, sigma: f64, nu: f64) -> Result<Self> {
        check_params(mu, sigma, Some(nu))?;
        Ok(Self {
            family: Family::StudentT,
            mu,
            sigma,
            nu: Some(nu),
            log_likelihood: f64::NAN,
            converged: true,
            window: None,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match (self.family, self.nu) {
            (Family::StudentT, Some(nu)) => StudentsT::new(self.mu, self.sigma, nu).unwrap().cdf(x),
            _ => Normal::new(self.mu, self.sigma).unwrap().cdf(x),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::Normal => check_params(self.mu, self.sigma, None),
            Family::StudentT => check_params(self.mu, self.sigma, Some(self.nu.unwrap_or(f64::NAN))),
        }
    }
}

fn check_params(mu: f64, sigma: f64, nu: Option<f64>) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::InvalidFit(format!("location {mu}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidFit(format!("scale {sigma}")));
    }
    if let Some(nu) = nu {
        if !(nu > 2.0 && nu.is_finite()) {
            return Err(Error::InvalidFit(format!("degrees of freedom {nu}")));
        }
    }
    Ok(())
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn t_loglik(xs: &[f64], mu: f64, sigma: f64, nu: f64) -> f64 {
    let c = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln() - sigma.ln();
    xs.iter()
        .map(|&x| {
            let d = (x - mu) / sigma;
            c - (nu + 1.0) / 2.0 * (d * d / nu).ln_1p()
        })
        .sum()
}

struct EmFit {
    mu: f64,
    sigma: f64,
    ll: f64,
    converged: bool,
}

/// Location and scale for fixed `nu` by EM on the latent precision weights.
fn em_fixed_nu(xs: &[f64], nu: f64, start: (f64, f64)) -> EmFit {
    let n = xs.len() as f64;
    let (mut mu, mut sigma) = start;
    let mut ll = t_loglik(xs, mu, sigma, nu);
    for _ in 0..EM_MAX_ITER {
        let (mut sw, mut swx) = (0.0, 0.0);
        let w: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let d = (x - mu) / sigma;
                (nu + 1.0) / (nu + d * d)
            })
            .collect();
        for (&wi, &x) in w.iter().zip(xs) {
            sw += wi;
            swx += wi * x;
        }
        let new_mu = swx / sw;
        let s2 = w.iter().zip(xs).map(|(wi, x)| wi * (x - new_mu) * (x - new_mu)).sum::<f64>() / n;
        let new_sigma = s2.sqrt();
        let new_ll = t_loglik(xs, new_mu, new_sigma, nu);
        let gain = (new_ll - ll) / n;
        mu = new_mu;
        sigma = new_sigma;
        ll = new_ll;
        if gain < EM_TOL {
            return EmFit {
                mu,
                sigma,
                ll,
                converged: true,
            };
        }
    }
    EmFit {
        mu,
        sigma,
        ll,
        converged: false,
    }
}

/// Maximum-likelihood fit. The t fit maximizes the profile likelihood over
/// `nu` in [`NU_RANGE`] by golden-section search.
pub fn fit_distribution(xs: &[f64], family: Family) -> Result<FittedDistribution> {
    if xs.len() < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            needed: MIN_OBSERVATIONS,
            got: xs.len(),
        });
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue(i));
    }
    let (mean, sd) = moments(xs);
    if !(sd > 1e-300) || sd <= 1e-14 * mean.abs() {
        return Err(Error::DegenerateSample);
    }
    match family {
        Family::Normal => {
            let n = xs.len() as f64;
            let ll = -0.5 * n * (2.0 * std::f64::consts::PI * sd * sd).ln() - 0.5 * n;
            Ok(FittedDistribution {
                log_likelihood: ll,
                ..FittedDistribution::normal(mean, sd)?
            })
        }
        Family::StudentT => {
            let mut all_converged = true;
            let mut profile = |nu: f64| {
                let f = em_fixed_nu(xs, nu, (mean, sd));
                all_converged &= f.converged;
                f
            };
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = NU_RANGE;
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let mut fc = profile(c);
            let mut fd = profile(d);
            while b - a > NU_TOL {
                if fc.ll >= fd.ll {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = profile(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = profile(d);
                }
            }
            let (nu, best) = if fc.ll >= fd.ll { (c, fc) } else { (d, fd) };
            Ok(FittedDistribution {
                log_likelihood: best.ll,
                converged: all_converged,
                ..FittedDistribution::student_t(best.mu, best.sigma, nu)?
            })
        }
    }
}

/// Grid masses `F(m_j) - F(m_{j-1})` between cell midpoints; the boundary
/// atoms absorb the tails.
pub fn discretize(fit: &FittedDistribution, grid: &Grid) -> Result<ProbabilityVector> {
    fit.validate()?;
    let k = grid.count();
    let half = grid.step() / 2.0;
    let cuts: Vec<f64> = (0..k - 1).map(|j| fit.cdf(grid.center(j) + half)).collect();
    let mut w = Vec::with_capacity(k);
    w.push(cuts[0]);
    for j in 1..k - 1 {
        w.push((cuts[j] - cuts[j - 1]).max(0.0));
    }
    w.push(1.0 - cuts[k - 2]);
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidFit(format!("gridded masses sum to {total}")));
    }
    ProbabilityVector::new(w.into_iter().map(|v| v / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal as NormalDist};

    #[test]
    fn t3_cdf_matches_closed_form() {
        let f = FittedDistribution::student_t(0.0, 1.0, 3.0).unwrap();
        for &t in &[-40.0, -3.0, -0.7, 0.0, 0.2, 1.5, 9.0] {
            let s3 = 3f64.sqrt();
            let exact = 0.5 + (t / (s3 * (1.0 + t * t / 3.0)) + (t / s3).atan()) / std::f64::consts::PI;
            assert!((f.cdf(t) - exact).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn normal_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = NormalDist::new(0.001, 0.01).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| d.sample(&mut rng)).collect();
        let f = fit_distribution(&xs, Family::Normal).unwrap();
        assert!((f.mu - 0.001).abs() < 3.0 * 0.01 / 100.0);
        assert!((f.sigma / 0.01 - 1.0).abs() < 0.05);
    }

    #[test]
    fn degenerate_and_short_samples() {
        assert_eq!(fit_distribution(&[0.01; 20], Family::Normal), Err(Error::DegenerateSample));
        assert_eq!(fit_distribution(&[0.01; 20], Family::StudentT), Err(Error::DegenerateSample));
        assert!(matches!(
            fit_distribution(&[0.0, 1.0], Family::Normal),
            Err(Error::TooFewObservations { needed: 10, got: 2 })
        ));
        assert!(FittedDistribution::student_t(0.0, 1.0, 2.0).is_err());
        assert!(FittedDistribution::normal(0.0, 0.0).is_err());
    }

    #[test]
    fn gridded_normal_is_symmetric() {
        let g = Grid::new(-3.0, 3.0, 61).unwrap();
        let p = discretize(&FittedDistribution::normal(0.0, 1.0).unwrap(), &g).unwrap();
        let w = p.weights();
        for j in 0..61 {
            assert!((w[j] - w[60 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_scale_concentrates() {
        let g = Grid::default();
        let mu = g.center(400) + 0.1 * g.step();
        let p = discretize(&FittedDistribution::normal(mu, 1e-9).unwrap(), &g).unwrap();
        assert!(p.weights()[400] > 1.0 - 1e-12);
    }

    #[test]
    fn large_nu_is_close_to_normal() {
        let g = Grid::default();
        let n = discretize(&FittedDistribution::normal(0.0, 0.01).unwrap(), &g).unwrap();
        let t = discretize(&FittedDistribution::student_t(0.0, 0.01, 100.0).unwrap(), &g).unwrap();
        let tv: f64 = n.weights().iter().zip(t.weights()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.01, "{tv}");
    }
}
