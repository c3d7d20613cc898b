//! Native speech-signal features: intensity, F0, pitch marks, jitter,
//! shimmer and pauses.
//!
//! Pipeline: [`decode_wav`] → [`estimate_pitch`] → [`extract_pitch_marks`]
//! → [`voice_report`]. All steps are deterministic functions of their input.

mod frames;
mod marks;
mod pitch;
mod report;
mod wav;

use serde::Serialize;
use thiserror::Error;

pub use frames::{frame_signal, hann_window, Frame, FrameLayout, Frames};
pub use marks::{extract_pitch_marks, MarkSegment, PitchMarks};
pub use pitch::{estimate_pitch, PitchTrack};
pub use report::{voice_report, VoiceReport};
pub use wav::{decode_wav, decode_wav_bytes, encode_wav_pcm16, WavError};

/// Mono PCM samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AcousticError {
    #[error("signal too short: need {needed_ms:.1} ms, got {got_ms:.1} ms")]
    SignalTooShort { needed_ms: f64, got_ms: f64 },
    #[error("invalid analysis parameters: {0}")]
    InvalidParams(String),
}

/// Analysis settings. Defaults: 40 ms frames every 10 ms, F0 search
/// 60–500 Hz, voicing threshold 0.45, silence gate −50 dBFS, pauses of at
/// least 250 ms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcousticParams {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
    pub silence_dbfs: f64,
    pub pause_min_ms: f64,
    pub emit_tracks: bool,
}

impl Default for AcousticParams {
    fn default() -> Self {
        Self {
            frame_ms: 40.0,
            hop_ms: 10.0,
            f0_min_hz: 60.0,
            f0_max_hz: 500.0,
            voicing_threshold: 0.45,
            silence_dbfs: -50.0,
            pause_min_ms: 250.0,
            emit_tracks: false,
        }
    }
}

impl AcousticParams {
    /// Checks the rate-independent invariants; returns the offending field.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        let finite = [
            ("frame_ms", self.frame_ms),
            ("hop_ms", self.hop_ms),
            ("f0_min_hz", self.f0_min_hz),
            ("f0_max_hz", self.f0_max_hz),
            ("voicing_threshold", self.voicing_threshold),
            ("silence_dbfs", self.silence_dbfs),
            ("pause_min_ms", self.pause_min_ms),
        ];
        if let Some((field, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err((field, "must be a finite number".into()));
        }
        if self.hop_ms <= 0.0 {
            return Err(("hop_ms", "must be > 0".into()));
        }
        if self.hop_ms > self.frame_ms {
            return Err(("hop_ms", "must be ≤ frame_ms".into()));
        }
        if self.f0_min_hz <= 0.0 {
            return Err(("f0_min_hz", "must be > 0".into()));
        }
        if self.f0_min_hz >= self.f0_max_hz {
            return Err(("f0_max_hz", "must be greater than f0_min_hz".into()));
        }
        if !(0.0..=1.0).contains(&self.voicing_threshold) {
            return Err(("voicing_threshold", "must be within [0, 1]".into()));
        }
        if self.pause_min_ms < 0.0 {
            return Err(("pause_min_ms", "must be ≥ 0".into()));
        }
        Ok(())
    }

    pub(crate) fn check_for_rate(&self, rate: u32) -> Result<(), AcousticError> {
        self.check()
            .map_err(|(f, why)| AcousticError::InvalidParams(format!("{f} {why}")))?;
        if self.f0_max_hz >= rate as f64 / 4.0 {
            return Err(AcousticError::InvalidParams(format!(
                "f0_max_hz must be below a quarter of the sample rate ({} Hz)",
                rate as f64 / 4.0
            )));
        }
        Ok(())
    }
}

/// Per-frame track rendered as CSV rows (`time_s,f0_hz,voicing,intensity_dbfs`).
pub fn track_rows(track: &PitchTrack) -> impl Iterator<Item = [f64; 4]> + '_ {
    (0..track.len()).map(|i| {
        [
            track.frame_times_s[i],
            track.f0_hz[i],
            track.voicing_strength[i],
            track.intensity_dbfs[i],
        ]
    })
}

#[cfg(test)]
pub(crate) mod synth {
    //! Test signal generators.
    use std::f64::consts::TAU;

    pub fn sine(freq: f64, amp: f64, seconds: f64, rate: u32) -> Vec<f64> {
        let n = (seconds * rate as f64).round() as usize;
        (0..n)
            .map(|i| amp * (TAU * freq * i as f64 / rate as f64).sin())
            .collect()
    }

    /// Raised-cosine cycles peaking at each cycle onset. Amplitudes should
    /// be equal, since the signal jumps where they change.
    pub fn onset_cycles(periods_s: &[f64], amp: f64, rate: u32) -> Vec<f64> {
        render(periods_s, &[amp], rate, |theta| 0.5 + 0.5 * theta.cos())
    }

    /// Sine cycles with per-cycle amplitude, continuous for any amplitudes.
    pub fn sine_cycles(periods_s: &[f64], amps: &[f64], rate: u32) -> Vec<f64> {
        render(periods_s, amps, rate, f64::sin)
    }

    fn render(periods_s: &[f64], amps: &[f64], rate: u32, shape: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t0 = 0.0;
        for (i, &p) in periods_s.iter().enumerate() {
            let amp = amps[i % amps.len()];
            let t1 = t0 + p;
            let mut k = (t0 * rate as f64).ceil() as usize;
            while (k as f64) < t1 * rate as f64 {
                let t = k as f64 / rate as f64 - t0;
                out.push(amp * shape(TAU * t / p));
                k += 1;
            }
            t0 = t1;
        }
        out
    }
}
