use crate::operators::Jet;

/// The transition profile χ(t) = f(2-t)/(f(2-t)+f(t-1)), f(s) = exp(-1/s) for s > 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutoffProfile;

fn f(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn f_jet(s: &Jet) -> Jet {
    if s.value() > 0.0 {
        s.recip().scale(-1.0).exp()
    } else {
        Jet::constant(0.0, s.order())
    }
}

impl CutoffProfile {
    pub fn chi(&self, t: f64) -> f64 {
        cutoff_chi(t)
    }
}

pub fn cutoff_chi(t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    let a = f(2.0 - t);
    a / (a + f(t - 1.0))
}

/// χ composed with a jet of its argument.
pub fn cutoff_jet(t: &Jet) -> Jet {
    let t0 = t.value();
    if t0 <= 1.0 {
        return Jet::constant(1.0, t.order());
    }
    if t0 >= 2.0 {
        return Jet::constant(0.0, t.order());
    }
    let a = f_jet(&t.scale(-1.0).add_const(2.0));
    let b = f_jet(&t.add_const(-1.0));
    a.div(&a.add(&b))
}
