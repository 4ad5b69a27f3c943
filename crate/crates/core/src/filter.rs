//! Butterworth low-pass filtering for the receiver rails.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{ensure, Result};

/// One second-order section, direct form II transposed.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn run(&self, x: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = self.b0 * *v + s1;
            s1 = self.b1 * *v - self.a1 * y + s2;
            s2 = self.b2 * *v - self.a2 * y;
            *v = y;
        }
    }
}

/// Even-order digital Butterworth low-pass built by the bilinear transform
/// with the cutoff pre-warped.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    sections: Vec<Biquad>,
    cutoff: f64,
    sample_rate: f64,
}

impl Butterworth {
    pub fn lowpass(order: usize, cutoff: f64, sample_rate: f64) -> Result<Self> {
        ensure(
            order >= 2 && order % 2 == 0,
            "order",
            "must be even and at least 2",
        )?;
        ensure(
            cutoff > 0.0 && cutoff < sample_rate / 2.0,
            "cutoff",
            "must lie in (0, fs/2)",
        )?;
        let k = libm::tan(PI * cutoff / sample_rate);
        let sections = (0..order / 2)
            .map(|m| {
                // pole pair m of the analog prototype
                let theta = PI * (2 * m + 1) as f64 / (2 * order) as f64;
                let q = 1.0 / (2.0 * libm::sin(theta));
                let norm = 1.0 / (1.0 + k / q + k * k);
                let b0 = k * k * norm;
                Biquad {
                    b0,
                    b1: 2.0 * b0,
                    b2: b0,
                    a1: 2.0 * (k * k - 1.0) * norm,
                    a2: (1.0 - k / q + k * k) * norm,
                }
            })
            .collect();
        Ok(Self {
            sections,
            cutoff,
            sample_rate,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Causal filtering in place.
    pub fn filter(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Forward then time-reversed pass: zero phase, squared magnitude.
    pub fn filtfilt(&self, x: &mut [f64]) {
        self.filter(x);
        x.reverse();
        self.filter(x);
        x.reverse();
    }

    /// Magnitude response of one causal pass at `f`.
    pub fn magnitude(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f / self.sample_rate;
        let (c1, s1) = (libm::cos(w), libm::sin(w));
        let (c2, s2) = (libm::cos(2.0 * w), libm::sin(2.0 * w));
        self.sections
            .iter()
            .map(|s| {
                let nr = s.b0 + s.b1 * c1 + s.b2 * c2;
                let ni = -(s.b1 * s1 + s.b2 * s2);
                let dr = 1.0 + s.a1 * c1 + s.a2 * c2;
                let di = -(s.a1 * s1 + s.a2 * s2);
                libm::sqrt((nr * nr + ni * ni) / (dr * dr + di * di))
            })
            .product()
    }
}
