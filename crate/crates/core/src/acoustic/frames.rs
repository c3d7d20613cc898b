use std::f64::consts::TAU;

use super::{AcousticError, AudioBuffer};

/// Frame geometry in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub frame_len: usize,
    pub hop: usize,
    pub count: usize,
    pub sample_rate_hz: u32,
}

impl FrameLayout {
    pub fn new(
        n_samples: usize,
        sample_rate_hz: u32,
        frame_ms: f64,
        hop_ms: f64,
    ) -> Result<Self, AcousticError> {
        if !(hop_ms > 0.0 && hop_ms <= frame_ms) {
            return Err(AcousticError::InvalidParams(
                "hop must be positive and no longer than the frame".into(),
            ));
        }
        let rate = sample_rate_hz as f64;
        let frame_len = ((frame_ms * rate / 1000.0).round() as usize).max(2);
        let hop = ((hop_ms * rate / 1000.0).round() as usize).max(1);
        if n_samples < frame_len {
            return Err(AcousticError::SignalTooShort {
                needed_ms: frame_len as f64 * 1000.0 / rate,
                got_ms: n_samples as f64 * 1000.0 / rate,
            });
        }
        Ok(Self {
            frame_len,
            hop,
            count: (n_samples - frame_len) / hop + 1,
            sample_rate_hz,
        })
    }

    pub fn start(&self, index: usize) -> usize {
        index * self.hop
    }

    /// Time of the frame centre in seconds.
    pub fn time_s(&self, index: usize) -> f64 {
        (self.start(index) as f64 + self.frame_len as f64 / 2.0) / self.sample_rate_hz as f64
    }

    pub fn hop_s(&self) -> f64 {
        self.hop as f64 / self.sample_rate_hz as f64
    }

    /// Frame whose centre is nearest to `sample`, clamped to `[lo, hi]`.
    pub fn nearest_frame(&self, sample: f64, lo: usize, hi: usize) -> usize {
        let k = ((sample - self.frame_len as f64 / 2.0) / self.hop as f64).round();
        (k.max(lo as f64) as usize).min(hi)
    }
}

/// Hann window of length `n` sampled at bin centres, so no coefficient is zero.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (TAU * (i as f64 + 0.5) / n as f64).cos())
        .collect()
}

pub struct Frame<'a> {
    pub index: usize,
    pub start: usize,
    pub time_s: f64,
    pub samples: &'a [f64],
}

impl Frame<'_> {
    pub fn windowed(&self, window: &[f64]) -> Vec<f64> {
        self.samples.iter().zip(window).map(|(x, w)| x * w).collect()
    }
}

/// Frames starting every hop; a trailing partial frame is dropped.
pub struct Frames<'a> {
    pub layout: FrameLayout,
    samples: &'a [f64],
    window: Vec<f64>,
    next: usize,
}

impl Frames<'_> {
    pub fn window(&self) -> &[f64] {
        &self.window
    }
}

impl<'a> Iterator for Frames<'a> {
    type Item = Frame<'a>;

    fn next(&mut self) -> Option<Frame<'a>> {
        if self.next >= self.layout.count {
            return None;
        }
        let index = self.next;
        self.next += 1;
        let start = self.layout.start(index);
        Some(Frame {
            index,
            start,
            time_s: self.layout.time_s(index),
            samples: &self.samples[start..start + self.layout.frame_len],
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.layout.count - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Frames<'_> {}

pub fn frame_signal(buf: &AudioBuffer, frame_ms: f64, hop_ms: f64) -> Result<Frames<'_>, AcousticError> {
    let layout = FrameLayout::new(buf.samples.len(), buf.sample_rate_hz, frame_ms, hop_ms)?;
    Ok(Frames {
        layout,
        samples: &buf.samples,
        window: hann_window(layout.frame_len),
        next: 0,
    })
}
