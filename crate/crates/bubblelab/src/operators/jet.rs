//! Truncated Taylor series in one variable.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(c: f64, order: usize) -> Jet {
        let mut v = vec![0.0; order + 1];
        v[0] = c;
        Jet(v)
    }

    /// The identity t ↦ x0 + t.
    pub fn variable(x0: f64, order: usize) -> Jet {
        let mut v = vec![0.0; order + 1];
        v[0] = x0;
        if order > 0 {
            v[1] = 1.0;
        }
        Jet(v)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet(self.0.iter().map(|a| a * c).collect())
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut v = self.0.clone();
        v[0] += c;
        Jet(v)
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.0.len().min(o.0.len());
        let mut v = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                v[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(v)
    }

    pub fn recip(&self) -> Jet {
        let a = &self.0;
        let n = a.len();
        let mut r = vec![0.0; n];
        r[0] = 1.0 / a[0];
        for m in 1..n {
            let s: f64 = (1..=m).map(|j| a[j] * r[m - j]).sum();
            r[m] = -s / a[0];
        }
        Jet(r)
    }

    pub fn div(&self, o: &Jet) -> Jet {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Jet {
        let a = &self.0;
        let n = a.len();
        let mut e = vec![0.0; n];
        e[0] = a[0].exp();
        for m in 1..n {
            let s: f64 = (1..=m).map(|j| j as f64 * a[j] * e[m - j]).sum();
            e[m] = s / m as f64;
        }
        Jet(e)
    }

    /// Real power; requires a positive constant term.
    pub fn powf(&self, p: f64) -> Jet {
        let a = &self.0;
        let n = a.len();
        let mut f = vec![0.0; n];
        f[0] = a[0].powf(p);
        for m in 1..n {
            let s: f64 = (1..=m)
                .map(|j| (p * j as f64 - (m - j) as f64) * a[j] * f[m - j])
                .sum();
            f[m] = s / (m as f64 * a[0]);
        }
        Jet(f)
    }

    /// Derivative series, one order shorter.
    pub fn derivative(&self) -> Jet {
        if self.0.len() <= 1 {
            return Jet(vec![0.0]);
        }
        Jet((1..self.0.len()).map(|m| m as f64 * self.0[m]).collect())
    }

    /// k-th derivative at the expansion point.
    pub fn nth_derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0.get(k).copied().unwrap_or(0.0) * fact
    }

    fn truncate(mut self, len: usize) -> Jet {
        self.0.truncate(len.max(1));
        self
    }
}

/// Flat radial Laplacian Δ₀ f = -(f'' + (n-1) f'/ρ) of a radial profile expanded at ρ0.
pub fn radial_laplacian(f: &Jet, rho0: f64, n: usize) -> Jet {
    let len = f.0.len().saturating_sub(2).max(1);
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let inv = Jet::variable(rho0, len - 1).recip();
    let t = d1.clone().truncate(len).mul(&inv).scale(n as f64 - 1.0);
    d2.truncate(len).add(&t).scale(-1.0)
}

/// Δ₀^k of a radial profile, given its Taylor expansion of order >= 2k at ρ0.
pub fn radial_polylaplacian(f: &Jet, rho0: f64, n: usize, k: usize) -> f64 {
    let mut g = f.clone();
    for _ in 0..k {
        g = radial_laplacian(&g, rho0, n);
    }
    g.value()
}
