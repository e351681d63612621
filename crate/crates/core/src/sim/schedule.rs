//! Piecewise-linear drive schedules in angular units (rad/µs, times in µs).

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::SimError;

/// Peak Rabi frequency, `2π · 1.5 MHz`.
pub const PEAK_RABI: f64 = TAU * 1.5;
/// Starting detuning, `-2π · 3.5 MHz`.
pub const START_DETUNING: f64 = -TAU * 3.5;
pub const RAMP_ON: f64 = 0.3;
pub const SWEEP: f64 = 2.4;
pub const RAMP_OFF: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub rabi: (f64, f64),
    pub detuning: (f64, f64),
}

impl Segment {
    fn at(&self, s: f64) -> (f64, f64) {
        let x = if self.duration > 0.0 { s / self.duration } else { 0.0 };
        let lerp = |(a, b): (f64, f64)| a + (b - a) * x;
        (lerp(self.rabi), lerp(self.detuning))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub segments: Vec<Segment>,
}

impl DriveSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self, SimError> {
        for pair in segments.windows(2) {
            if pair[0].rabi.1 != pair[1].rabi.0 || pair[0].detuning.1 != pair[1].detuning.0 {
                return Err(SimError::Discontinuous);
            }
        }
        if segments.iter().any(|s| !(s.duration >= 0.0)) {
            return Err(SimError::NegativeDuration);
        }
        Ok(Self { segments })
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// `(Ω, Δ)` at time `t`.
    pub fn at(&self, t: f64) -> Result<(f64, f64), SimError> {
        let total = self.total_time();
        if !(0.0..=total).contains(&t) {
            return Err(SimError::OutOfRange { t, total });
        }
        let mut start = 0.0;
        for seg in &self.segments {
            if t <= start + seg.duration {
                return Ok(seg.at(t - start));
            }
            start += seg.duration;
        }
        let last = self.segments.last().expect("non-empty when total > 0");
        Ok((last.rabi.1, last.detuning.1))
    }

    /// Same drive played `k` times slower.
    pub fn stretch(&self, k: f64) -> Self {
        let segments = self.segments.iter().map(|s| Segment { duration: s.duration * k, ..*s }).collect();
        Self { segments }
    }
}

/// Rabi ramp-on at fixed negative detuning, detuning sweep to `final_detuning`
/// at peak Rabi, then Rabi ramp-off.
pub fn sweep_schedule(final_detuning: f64) -> DriveSchedule {
    let segments = vec![
        Segment { duration: RAMP_ON, rabi: (0.0, PEAK_RABI), detuning: (START_DETUNING, START_DETUNING) },
        Segment { duration: SWEEP, rabi: (PEAK_RABI, PEAK_RABI), detuning: (START_DETUNING, final_detuning) },
        Segment { duration: RAMP_OFF, rabi: (PEAK_RABI, 0.0), detuning: (final_detuning, final_detuning) },
    ];
    DriveSchedule { segments }
}

/// Constant drive for `duration`.
pub fn constant_schedule(duration: f64, rabi: f64, detuning: f64) -> DriveSchedule {
    DriveSchedule { segments: vec![Segment { duration, rabi: (rabi, rabi), detuning: (detuning, detuning) }] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_segments_totalling_three_microseconds() {
        let s = sweep_schedule(TAU * 3.5);
        assert_eq!(s.segments.len(), 3);
        assert!((s.total_time() - 3.0).abs() < 1e-12);
        assert!(DriveSchedule::new(s.segments.clone()).is_ok());
    }

    #[test]
    fn continuity_at_the_joints() {
        let s = sweep_schedule(TAU * 3.9);
        for t in [0.3, 2.7] {
            let (a, b) = (s.at(t - 1e-9).unwrap(), s.at(t + 1e-9).unwrap());
            assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6);
        }
        assert_eq!(s.at(0.0).unwrap(), (0.0, START_DETUNING));
        let (rabi, det) = s.at(s.total_time()).unwrap();
        assert!(rabi.abs() < 1e-12 && (det - TAU * 3.9).abs() < 1e-12);
        let mid = s.at(1.5).unwrap();
        assert!((mid.0 - PEAK_RABI).abs() < 1e-12);
        assert!((mid.1 - (START_DETUNING + TAU * 3.9) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_times() {
        let s = sweep_schedule(TAU * 3.5);
        assert!(matches!(s.at(-0.1), Err(SimError::OutOfRange { .. })));
        assert!(matches!(s.at(3.1), Err(SimError::OutOfRange { .. })));
    }

    #[test]
    fn jumps_are_rejected() {
        let a = Segment { duration: 1.0, rabi: (0.0, 1.0), detuning: (0.0, 0.0) };
        let b = Segment { duration: 1.0, rabi: (2.0, 2.0), detuning: (0.0, 0.0) };
        assert_eq!(DriveSchedule::new(vec![a, b]), Err(SimError::Discontinuous));
    }

    #[test]
    fn stretching_scales_time_only() {
        let s = sweep_schedule(TAU * 3.5).stretch(4.0);
        assert!((s.total_time() - 12.0).abs() < 1e-12);
        assert!((s.at(1.2).unwrap().0 - PEAK_RABI).abs() < 1e-12);
    }
}
