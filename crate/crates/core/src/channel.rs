//! Dense Pauli channels over all 4^n labels, for small registers.

use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// Largest register a dense channel will enumerate.
pub const DENSE_MAX_QUBITS: usize = 12;

/// Diagonal Pauli channel. Eigenvalues are canonical; rates are derived.
///
/// Vectors are indexed by [`Pauli::dense_index`].
#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    n: usize,
    eigenvalues: Vec<f64>,
    rates: Option<Vec<f64>>,
}

// In-place per-qubit transform with the 4x4 kernel (-1)^<a,b> in I,X,Y,Z order.
fn wht4(v: &mut [f64]) {
    let len = v.len();
    let mut stride = 1;
    while stride < len {
        for block in (0..len).step_by(4 * stride) {
            for off in 0..stride {
                let i = block + off;
                let (a, b, c, d) = (v[i], v[i + stride], v[i + 2 * stride], v[i + 3 * stride]);
                v[i] = a + b + c + d;
                v[i + stride] = a + b - c - d;
                v[i + 2 * stride] = a - b + c - d;
                v[i + 3 * stride] = a - b - c + d;
            }
        }
        stride *= 4;
    }
}

/// λ_b = Σ_a p_a (−1)^⟨a,b⟩ over dense vectors.
pub fn walsh_hadamard(rates: &[f64]) -> Vec<f64> {
    let mut v = rates.to_vec();
    wht4(&mut v);
    v
}

/// p_a = 4^{−n} Σ_b λ_b (−1)^⟨a,b⟩.
pub fn inverse_walsh_hadamard(eigenvalues: &[f64]) -> Vec<f64> {
    let mut v = eigenvalues.to_vec();
    wht4(&mut v);
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

fn check_len(n: usize, len: usize) -> Result<()> {
    if n > DENSE_MAX_QUBITS {
        return Err(Error::Invalid(format!("dense channels support n <= {DENSE_MAX_QUBITS}, got {n}")));
    }
    let expected = 1usize << (2 * n);
    if len != expected {
        return Err(Error::Dimension { expected, found: len });
    }
    Ok(())
}

impl PauliChannel {
    pub fn identity(n: usize) -> Result<Self> {
        check_len(n, 1 << (2 * n))?;
        Ok(PauliChannel { n, eigenvalues: vec![1.0; 1 << (2 * n)], rates: None })
    }

    /// From eigenvalues; λ_I must be exactly 1.
    pub fn from_eigenvalues(n: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        check_len(n, eigenvalues.len())?;
        if eigenvalues[0] != 1.0 {
            return Err(Error::Invalid(format!("identity eigenvalue must be 1, got {}", eigenvalues[0])));
        }
        Ok(PauliChannel { n, eigenvalues, rates: None })
    }

    /// From error rates that sum to 1 (to 1e-12).
    pub fn from_rates(n: usize, rates: Vec<f64>) -> Result<Self> {
        check_len(n, rates.len())?;
        let total: f64 = rates.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("rates sum to {total}, not 1")));
        }
        let mut eigenvalues = walsh_hadamard(&rates);
        eigenvalues[0] = 1.0;
        Ok(PauliChannel { n, eigenvalues, rates: Some(rates) })
    }

    /// From (label, rate) pairs; missing labels are zero.
    pub fn from_rate_map(n: usize, entries: &[(&str, f64)]) -> Result<Self> {
        let mut rates = vec![0.0; 1 << (2 * n)];
        for (label, p) in entries {
            let a: Pauli = label.parse()?;
            if a.n() != n {
                return Err(Error::Dimension { expected: n, found: a.n() });
            }
            rates[a.dense_index()] += p;
        }
        Self::from_rates(n, rates)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn rates(&self) -> Option<&[f64]> {
        self.rates.as_deref()
    }

    pub fn eigenvalue(&self, a: &Pauli) -> f64 {
        self.eigenvalues[a.dense_index()]
    }

    /// Recompute eigenvalues from the stored rates.
    pub fn rates_to_eigenvalues(&self) -> Result<PauliChannel> {
        let rates = self.rates.as_ref().ok_or_else(|| Error::Invalid("channel has no rates".into()))?;
        Self::from_rates(self.n, rates.clone())
    }

    /// Populate rates from eigenvalues. Rates may come out negative.
    pub fn eigenvalues_to_rates(&self) -> PauliChannel {
        let rates = inverse_walsh_hadamard(&self.eigenvalues);
        PauliChannel { n: self.n, eigenvalues: self.eigenvalues.clone(), rates: Some(rates) }
    }

    /// True when every rate is non-negative (completely positive channel).
    pub fn is_positive(&self, tol: f64) -> bool {
        let rates = match &self.rates {
            Some(r) => r.clone(),
            None => inverse_walsh_hadamard(&self.eigenvalues),
        };
        rates.iter().all(|&p| p >= -tol)
    }

    /// Channel composition; eigenvalues multiply.
    pub fn compose(&self, other: &PauliChannel) -> Result<PauliChannel> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        let eigenvalues = self.eigenvalues.iter().zip(&other.eigenvalues).map(|(a, b)| a * b).collect();
        Ok(PauliChannel { n: self.n, eigenvalues, rates: None })
    }

    /// Every λ is strictly positive.
    pub fn is_invertible(&self) -> bool {
        self.eigenvalues.iter().all(|&l| l > 0.0)
    }
}
