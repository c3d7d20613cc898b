//! Framewise intensity and autocorrelation F0.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use super::frames::frame_signal;
use super::{AcousticError, AcousticParams, AudioBuffer, FrameLayout};

/// Intensity floor for silent frames.
pub const INTENSITY_FLOOR_DBFS: f64 = -120.0;

/// A later autocorrelation peak must beat the first candidate by this
/// factor to be chosen instead, which keeps period multiples from winning.
const FIRST_PEAK_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PitchTrack {
    pub frame_times_s: Vec<f64>,
    /// 0 for unvoiced frames.
    pub f0_hz: Vec<f64>,
    pub voicing_strength: Vec<f64>,
    pub intensity_dbfs: Vec<f64>,
    #[serde(skip)]
    pub layout: FrameLayout,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
}

impl PitchTrack {
    pub fn len(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0_hz.is_empty()
    }

    pub fn is_voiced(&self, i: usize) -> bool {
        self.f0_hz[i] > 0.0
    }

    pub fn voiced_count(&self) -> usize {
        self.f0_hz.iter().filter(|f| **f > 0.0).count()
    }

    pub fn voiced_f0(&self) -> Vec<f64> {
        self.f0_hz.iter().copied().filter(|f| *f > 0.0).collect()
    }
}

/// Autocorrelation of `x` for lags `0..x.len()` via zero-padded FFT.
struct Autocorrelator {
    size: usize,
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

impl Autocorrelator {
    fn new(len: usize) -> Self {
        let size = (2 * len).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
            buf: vec![Complex::default(); size],
        }
    }

    fn run(&mut self, x: &[f64], out: &mut Vec<f64>) {
        self.buf.iter_mut().for_each(|c| *c = Complex::default());
        for (c, &v) in self.buf.iter_mut().zip(x) {
            c.re = v;
        }
        self.forward.process(&mut self.buf);
        for c in self.buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), 0.0);
        }
        self.inverse.process(&mut self.buf);
        let scale = 1.0 / self.size as f64;
        out.clear();
        out.extend(self.buf[..x.len()].iter().map(|c| c.re * scale));
    }
}

fn intensity_dbfs(frame: &[f64], window: &[f64], window_energy: f64) -> f64 {
    let energy: f64 = frame.iter().zip(window).map(|(x, w)| (x * w).powi(2)).sum();
    let rms = (energy / window_energy).sqrt();
    if rms > 0.0 {
        (20.0 * rms.log10()).max(INTENSITY_FLOOR_DBFS)
    } else {
        INTENSITY_FLOOR_DBFS
    }
}

/// Best period candidate as (refined lag, peak value).
fn pick_peak(r: &[f64], min_lag: usize, max_lag: usize) -> Option<(f64, f64)> {
    let hi = max_lag.min(r.len().saturating_sub(2));
    let lo = min_lag.max(1);
    if lo > hi {
        return None;
    }
    let peaks: Vec<usize> = (lo..=hi)
        .filter(|&t| r[t] > r[t - 1] && r[t] >= r[t + 1])
        .collect();
    let best = peaks.iter().map(|&t| r[t]).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let t = *peaks.iter().find(|&&t| r[t] >= FIRST_PEAK_RATIO * best)?;
    let (a, b, c) = (r[t - 1], r[t], r[t + 1]);
    let denom = a - 2.0 * b + c;
    let delta = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some((t as f64 + delta, b - 0.25 * (a - c) * delta))
}

/// Per-frame F0 and intensity.
///
/// Each frame is Hann-windowed. Intensity is the window-normalised RMS in
/// dBFS, floored at −120. F0 comes from the autocorrelation of the
/// mean-removed windowed frame divided by the window's own autocorrelation,
/// searched over lags `rate/f0_max ..= rate/f0_min` and refined by a
/// three-point parabola. A frame is voiced when the refined peak reaches
/// the voicing threshold, the intensity reaches the silence gate and the
/// resulting F0 lies inside the search range.
pub fn estimate_pitch(buf: &AudioBuffer, params: &AcousticParams) -> Result<PitchTrack, AcousticError> {
    params.check_for_rate(buf.sample_rate_hz)?;
    let frames = frame_signal(buf, params.frame_ms, params.hop_ms)?;
    let layout = frames.layout;
    let window = frames.window().to_vec();
    let rate = buf.sample_rate_hz as f64;
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let mut ac = Autocorrelator::new(layout.frame_len);
    let mut window_ac = Vec::new();
    ac.run(&window, &mut window_ac);
    let min_lag = (rate / params.f0_max_hz).floor() as usize;
    let max_lag = ((rate / params.f0_min_hz).ceil() as usize).min(layout.frame_len - 2);

    let n = layout.count;
    let mut track = PitchTrack {
        frame_times_s: Vec::with_capacity(n),
        f0_hz: Vec::with_capacity(n),
        voicing_strength: Vec::with_capacity(n),
        intensity_dbfs: Vec::with_capacity(n),
        layout,
        f0_min_hz: params.f0_min_hz,
        f0_max_hz: params.f0_max_hz,
    };

    let mut centred = Vec::with_capacity(layout.frame_len);
    let mut r = Vec::new();
    for frame in frames {
        let intensity = intensity_dbfs(frame.samples, &window, window_energy);
        let mean = frame.samples.iter().sum::<f64>() / frame.samples.len() as f64;
        centred.clear();
        centred.extend(frame.samples.iter().zip(&window).map(|(x, w)| (x - mean) * w));
        ac.run(&centred, &mut r);

        let mut f0 = 0.0;
        let mut strength = 0.0;
        if r[0] > 0.0 {
            let r0 = r[0];
            for (t, v) in r.iter_mut().enumerate() {
                *v = (*v / r0) / (window_ac[t] / window_ac[0]);
            }
            if let Some((lag, peak)) = pick_peak(&r, min_lag, max_lag) {
                strength = peak.clamp(0.0, 1.0);
                let candidate = rate / lag;
                if peak >= params.voicing_threshold
                    && intensity >= params.silence_dbfs
                    && (params.f0_min_hz..=params.f0_max_hz).contains(&candidate)
                {
                    f0 = candidate;
                }
            }
        }
        track.frame_times_s.push(frame.time_s);
        track.f0_hz.push(f0);
        track.voicing_strength.push(strength);
        track.intensity_dbfs.push(intensity);
    }
    Ok(track)
}
