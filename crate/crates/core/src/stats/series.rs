//! Truncated formal power series over a [`Scalar`] coefficient field, and
//! the generating-function toolkit for the low density final state.
//!
//! With `BigRational` coefficients every operation here is exact; with
//! `f64` the same code gives fast approximate series.  All series carry
//! their own truncation order (`len() - 1`); binary operations truncate to
//! the shorter operand.

use crate::scalar::Scalar;
use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("density 1/2 is a pole of the tail sums")]
    DensityPole,
    #[error("division by a series with zero constant term")]
    NonUnitDivisor,
    #[error("shift past nonzero coefficients")]
    BadShift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PowerSeries<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        PowerSeries { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        PowerSeries {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn constant(value: T, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = value;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    /// Truncation order (highest retained power).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        PowerSeries {
            coeffs: (0..n)
                .map(|i| self.coeffs[i].clone() + rhs.coeffs[i].clone())
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        PowerSeries {
            coeffs: (0..n)
                .map(|i| self.coeffs[i].clone() - rhs.coeffs[i].clone())
                .collect(),
        }
    }

    pub fn scale(&self, factor: &T) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            if self.coeffs[i] == T::zero() {
                continue;
            }
            for j in 0..n - i {
                out[i + j] = out[i + j].clone() + self.coeffs[i].clone() * rhs.coeffs[j].clone();
            }
        }
        PowerSeries { coeffs: out }
    }

    /// Long division by a series with invertible constant term.
    pub fn div(&self, rhs: &Self) -> Result<Self, SeriesError> {
        if rhs.coeffs[0] == T::zero() {
            return Err(SeriesError::NonUnitDivisor);
        }
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = self.coeffs[i].clone();
            for j in 0..i {
                acc = acc - out[j].clone() * rhs.coeffs[i - j].clone();
            }
            out[i] = acc / rhs.coeffs[0].clone();
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// Square root of a series with constant term one.
    pub fn sqrt_unit(&self) -> Result<Self, SeriesError> {
        if self.coeffs[0] != T::one() {
            return Err(SeriesError::NonUnitDivisor);
        }
        let n = self.coeffs.len();
        let two = T::from_u64(2);
        let mut out = vec![T::zero(); n];
        out[0] = T::one();
        for i in 1..n {
            let mut acc = self.coeffs[i].clone();
            for j in 1..i {
                acc = acc - out[j].clone() * out[i - j].clone();
            }
            out[i] = acc / two.clone();
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// Substitute `u -> u^k`.
    pub fn dilate(&self, k: usize) -> Self {
        assert!(k >= 1);
        let n = self.coeffs.len();
        let mut out = vec![T::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            if i * k < n {
                out[i * k] = c.clone();
            }
        }
        PowerSeries { coeffs: out }
    }

    /// Multiply by `u^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![T::zero(); n];
        for i in 0..n.saturating_sub(k) {
            out[i + k] = self.coeffs[i].clone();
        }
        PowerSeries { coeffs: out }
    }

    /// Divide by `u^k`; the low-order coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<Self, SeriesError> {
        if self.coeffs.iter().take(k).any(|c| *c != T::zero()) {
            return Err(SeriesError::BadShift);
        }
        Ok(PowerSeries {
            coeffs: self.coeffs[k..].to_vec(),
        })
    }

    /// Multiply by `1/(1-u)`: running partial sums.
    pub fn partial_sums(&self) -> Self {
        let mut acc = T::zero();
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    acc = acc.clone() + c.clone();
                    acc.clone()
                })
                .collect(),
        }
    }

    pub fn even_part(&self) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 0 { c.clone() } else { T::zero() })
                .collect(),
        }
    }

    pub fn odd_part(&self) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { c.clone() } else { T::zero() })
                .collect(),
        }
    }

    /// Largest absolute coefficient difference, in float view.
    pub fn max_abs_dev(&self, rhs: &Self) -> f64 {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        (0..n)
            .map(|i| {
                (self.coeffs[i].clone() - rhs.coeffs[i].clone())
                    .to_f64()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    fn agrees_with(&self, rhs: &Self) -> bool {
        if T::exact() {
            let n = self.coeffs.len().min(rhs.coeffs.len());
            (0..n).all(|i| self.coeffs[i] == rhs.coeffs[i])
        } else {
            self.max_abs_dev(rhs) < 1e-9
        }
    }
}

/// Every named series of the low density generating-function apparatus,
/// together with the coefficientwise identity checks.
#[derive(Debug, Clone)]
pub struct SeriesToolkit<T> {
    pub order: usize,
    pub rho: T,
    /// Gap-law weights: coefficient `n` is `c_n rho^n (1-rho)^{n+1}`.
    pub psi: PowerSeries<T>,
    /// Tail sums of `psi`.
    pub theta: PowerSeries<T>,
    /// Tail sums of `theta`.
    pub lambda: PowerSeries<T>,
    /// Pair-correlation generating function (coefficient 0 is zero).
    pub g: PowerSeries<T>,
    /// Truncated version: coefficient `n >= 1` is `g(n) - rho^2`.
    pub g_truncated: PowerSeries<T>,
    pub identities: IdentityReport,
}

/// Results of the built-in cross checks; `max_dev` is the worst float
/// deviation seen (zero in exact mode when all checks pass).
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct IdentityReport {
    pub psi_closed_form: bool,
    pub psi_quadratic: bool,
    pub theta_two_routes: bool,
    pub lambda_two_routes: bool,
    pub theta_at_one: bool,
    pub parity: bool,
    pub max_dev: f64,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.psi_closed_form
            && self.psi_quadratic
            && self.theta_two_routes
            && self.lambda_two_routes
            && self.theta_at_one
            && self.parity
    }
}

/// Catalan numbers `c_0..=c_n` as exact integers.
pub fn catalan_upto(n: usize) -> Vec<BigUint> {
    // c_{k+1} = c_k * 2(2k+1)/(k+2)
    let mut out = Vec::with_capacity(n + 1);
    out.push(BigUint::from(1u32));
    for k in 0..n {
        let next =
            (&out[k] * BigUint::from(2 * (2 * k as u64 + 1))) / BigUint::from(k as u64 + 2);
        out.push(next);
    }
    out
}

/// Build the full toolkit at truncation `order`.  Fails at `rho = 1/2`
/// where the tail sums lose their closed form.
pub fn series_toolkit<T: Scalar>(rho: T, order: usize) -> Result<SeriesToolkit<T>, SeriesError> {
    let one = T::one();
    let one_minus_rho = one.clone() - rho.clone();
    let one_minus_two_rho = one.clone() - T::from_u64(2) * rho.clone();
    if one_minus_two_rho == T::zero() {
        return Err(SeriesError::DensityPole);
    }
    // work a little past the target order so shifts stay exact
    let work = order + 6;
    let mut report = IdentityReport::default();

    let cats = catalan_upto(work);
    let mut psi_coeffs = Vec::with_capacity(work + 1);
    let mut pow = one_minus_rho.clone(); // rho^n (1-rho)^{n+1} built incrementally
    for c in cats.iter().take(work + 1) {
        psi_coeffs.push(T::from_biguint(c) * pow.clone());
        pow = pow * rho.clone() * one_minus_rho.clone();
    }
    let psi = PowerSeries::from_coeffs(psi_coeffs);

    // closed form 2(1-rho) / (1 + sqrt(1 - 4 rho (1-rho) u))
    let mut radicand = PowerSeries::one(work);
    radicand.coeffs[1] = -(T::from_u64(4) * rho.clone() * one_minus_rho.clone());
    let root = radicand.sqrt_unit()?;
    let denom = PowerSeries::one(work).add(&root);
    let psi_closed =
        PowerSeries::constant(T::from_u64(2) * one_minus_rho.clone(), work).div(&denom)?;
    report.psi_closed_form = psi.agrees_with(&psi_closed);
    report.max_dev = report.max_dev.max(psi.max_abs_dev(&psi_closed));

    // quadratic relation psi = (1-rho) + rho u psi^2
    let quad = PowerSeries::constant(one_minus_rho.clone(), work)
        .add(&psi.mul(&psi).shift_up(1).scale(&rho));
    report.psi_quadratic = psi.agrees_with(&quad);
    report.max_dev = report.max_dev.max(psi.max_abs_dev(&quad));

    // theta(n) = sum_{m>=n} psi(m) = 1 - sum_{m<n} psi(m)
    let mut theta_coeffs = Vec::with_capacity(work + 1);
    let mut head = T::zero();
    for c in psi.coeffs().iter().take(work + 1) {
        theta_coeffs.push(one.clone() - head.clone());
        head = head + c.clone();
    }
    let theta = PowerSeries::from_coeffs(theta_coeffs);
    // closed route (1 - u psi) / (1 - u)
    let theta_closed = PowerSeries::one(work).sub(&psi.shift_up(1)).partial_sums();
    report.theta_two_routes = theta.agrees_with(&theta_closed);
    report.max_dev = report.max_dev.max(theta.max_abs_dev(&theta_closed));

    // lambda(n) = sum_{m>=n} theta(m) = Theta(1) - sum_{m<n} theta(m)
    let theta_at_one = one_minus_rho.clone() / one_minus_two_rho.clone();
    let mut lambda_coeffs = Vec::with_capacity(work + 1);
    let mut head = T::zero();
    for c in theta.coeffs().iter().take(work + 1) {
        lambda_coeffs.push(theta_at_one.clone() - head.clone());
        head = head + c.clone();
    }
    let lambda = PowerSeries::from_coeffs(lambda_coeffs);
    let lambda_closed = PowerSeries::constant(theta_at_one.clone(), work)
        .sub(&theta.shift_up(1))
        .partial_sums();
    report.lambda_two_routes = lambda.agrees_with(&lambda_closed);
    report.max_dev = report.max_dev.max(lambda.max_abs_dev(&lambda_closed));
    // lambda(0) = (1-rho)/(1-2rho), lambda(1) = rho/(1-2rho)
    let lambda1 = rho.clone() / one_minus_two_rho.clone();
    report.theta_at_one = if T::exact() {
        lambda.coeff(0) == theta_at_one && lambda.coeff(1) == lambda1
    } else {
        (lambda.coeff(0) - theta_at_one).to_f64().abs() < 1e-9
            && (lambda.coeff(1) - lambda1).to_f64().abs() < 1e-9
    };

    // no-landmark part: (1-2rho)/z^2 (Lambda(z^2) - z^2 rho/(1-2rho)
    //                                - (1-rho)/(1-2rho))
    let mut even_num = lambda.dilate(2);
    even_num.coeffs[0] = even_num.coeffs[0].clone() - lambda.coeff(0);
    even_num.coeffs[2] = even_num.coeffs[2].clone() - lambda.coeff(1);
    let g_even_part = even_num.shift_down(2)?.scale(&one_minus_two_rho);

    // landmark-crossing part: (1-2rho) (Theta(z^2)-1)^2 / (z (1-z Psi(z^2)))
    let t2m1 = theta.dilate(2).sub(&PowerSeries::one(work));
    let numerator = t2m1.mul(&t2m1);
    let denom = PowerSeries::one(work).sub(&psi.dilate(2).shift_up(1));
    let g_cross = numerator
        .div(&denom)?
        .shift_down(1)?
        .scale(&one_minus_two_rho);

    let g = g_even_part.add(&g_cross).truncate(order);

    // truncated pair correlation: subtract rho^2 z/(1-z)
    let rho2 = rho.clone() * rho.clone();
    let mut gt_coeffs = g.coeffs().to_vec();
    for c in gt_coeffs.iter_mut().skip(1) {
        *c = c.clone() - rho2.clone();
    }
    let g_truncated = PowerSeries::from_coeffs(gt_coeffs);

    // parity identity: G_even + z G_odd = 2 rho^2 z^2 / (1 - z^2)
    let lhs = g.even_part().add(&g.odd_part().shift_up(1));
    let mut rhs = PowerSeries::zeros(order);
    for n in 1..=order / 2 {
        rhs.coeffs[2 * n] = T::from_u64(2) * rho2.clone();
    }
    report.parity = lhs.agrees_with(&rhs);
    report.max_dev = report.max_dev.max(lhs.max_abs_dev(&rhs));

    Ok(SeriesToolkit {
        order,
        rho,
        psi: psi.truncate(order),
        theta: theta.truncate(order),
        lambda: lambda.truncate(order),
        g,
        g_truncated,
        identities: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar as _;
    use crate::Exact;

    fn rat(n: i64, d: i64) -> Exact {
        <Exact as crate::scalar::Scalar>::from_ratio(n, d)
    }

    #[test]
    fn catalan_values() {
        let c = catalan_upto(10);
        let want = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];
        for (got, want) in c.iter().zip(want.iter()) {
            assert_eq!(got, &BigUint::from(*want));
        }
    }

    #[test]
    fn series_arithmetic_exact() {
        let a = PowerSeries::from_coeffs(vec![rat(1, 1), rat(2, 1), rat(3, 1)]);
        let b = PowerSeries::from_coeffs(vec![rat(1, 1), rat(-1, 1), rat(0, 1)]);
        let prod = a.mul(&b);
        assert_eq!(prod.coeff(0), rat(1, 1));
        assert_eq!(prod.coeff(1), rat(1, 1));
        assert_eq!(prod.coeff(2), rat(1, 1));
        let back = prod.div(&b).unwrap();
        assert_eq!(back.coeffs(), a.coeffs());
    }

    #[test]
    fn sqrt_squares_back() {
        let mut x = PowerSeries::one(20);
        x.coeffs[1] = rat(-21, 25);
        let r = x.sqrt_unit().unwrap();
        assert_eq!(r.mul(&r).coeffs(), x.coeffs());
    }

    #[test]
    fn toolkit_identities_exact_rho_three_tenths() {
        let tk = series_toolkit(rat(3, 10), 100).unwrap();
        assert!(tk.identities.all_hold(), "{:?}", tk.identities);
        // psi(0) = 1 - rho
        assert_eq!(tk.psi.coeff(0), rat(7, 10));
        // lambda(0) = (1-rho)/(1-2rho) = 7/4
        assert_eq!(tk.lambda.coeff(0), rat(7, 4));
    }

    #[test]
    fn theta_at_one_value_third() {
        // rho = 1/3: tail sum at the origin is (2/3)/(1/3) = 2
        let tk = series_toolkit(rat(1, 3), 40).unwrap();
        assert_eq!(tk.lambda.coeff(0), rat(2, 1));
    }

    #[test]
    fn pole_rejected() {
        assert_eq!(
            series_toolkit(rat(1, 2), 10).unwrap_err(),
            SeriesError::DensityPole
        );
    }

    #[test]
    fn float_and_exact_agree() {
        let exact = series_toolkit(rat(3, 10), 60).unwrap();
        let float = series_toolkit(0.3f64, 60).unwrap();
        assert!(float.identities.all_hold());
        for n in 0..=60 {
            let e = exact.g.coeff(n).to_f64();
            let f = float.g.coeff(n);
            assert!((e - f).abs() < 1e-10, "n={n} {e} {f}");
        }
    }

    #[test]
    fn g_low_order_sanity() {
        // g(1) = 0: the final word has no adjacent particles
        let tk = series_toolkit(rat(3, 10), 30).unwrap();
        assert_eq!(tk.g.coeff(0), rat(0, 1));
        assert_eq!(tk.g.coeff(1), rat(0, 1));
        // pair sums: g(2n-1) + g(2n) = 2 rho^2
        let two_rho2 = rat(2 * 9, 100);
        for n in 1..=14 {
            let s = tk.g.coeff(2 * n - 1) + tk.g.coeff(2 * n);
            assert_eq!(s, two_rho2, "n={n}");
        }
    }

    #[test]
    fn truncated_ratio_bounded() {
        let tk = series_toolkit(0.3f64, 120).unwrap();
        let bound = (4.0 * 0.3 * 0.7f64).sqrt() + 0.05;
        let gt = &tk.g_truncated;
        for n in 20..119 {
            let a = gt.coeff(n).abs();
            let b = gt.coeff(n + 1).abs();
            if a > 1e-30 {
                assert!(b / a <= bound, "n={n} ratio {}", b / a);
            }
        }
    }
}
