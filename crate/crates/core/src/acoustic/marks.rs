//! Cycle-level pitch marks inside voiced stretches.

use serde::Serialize;

use super::{AudioBuffer, PitchTrack};

/// Voiced runs shorter than this many frames get no marks.
pub const MIN_RUN_FRAMES: usize = 3;

/// Search radius around the predicted next mark, as a fraction of the period.
const SEARCH_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MarkSegment {
    pub mark_times_s: Vec<f64>,
    pub peak_amps: Vec<f64>,
}

impl MarkSegment {
    pub fn periods_s(&self) -> Vec<f64> {
        self.mark_times_s.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn duration_s(&self) -> f64 {
        match (self.mark_times_s.first(), self.mark_times_s.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PitchMarks {
    pub segments: Vec<MarkSegment>,
}

impl PitchMarks {
    pub fn mark_count(&self) -> usize {
        self.segments.iter().map(|s| s.mark_times_s.len()).sum()
    }
}

/// Maximal runs `[first, last]` of voiced frames.
pub(crate) fn voiced_runs(track: &PitchTrack) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for i in 0..=track.len() {
        let voiced = i < track.len() && track.is_voiced(i);
        match (voiced, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// Vertex of the parabola through three equally spaced samples at
/// `i - 1, i, i + 1`, as (offset, value).
fn parabolic(a: f64, b: f64, c: f64) -> (f64, f64) {
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (0.0, b);
    }
    let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    (delta, b - 0.25 * (a - c) * delta)
}

struct Walker<'a> {
    x: &'a [f64],
    polarity: f64,
    lo: usize,
    hi: usize,
}

impl Walker<'_> {
    fn value(&self, i: usize) -> f64 {
        self.polarity * self.x[i]
    }

    /// Largest polarity-adjusted sample in `[from, to]`, clipped to the run.
    fn peak_in(&self, from: f64, to: f64) -> Option<usize> {
        let from = from.ceil().max(self.lo as f64) as usize;
        let to = (to.floor().min(self.hi as f64)).max(0.0) as usize;
        if from > to {
            return None;
        }
        (from..=to).reduce(|best, i| if self.value(i) > self.value(best) { i } else { best })
    }

    fn refine(&self, i: usize) -> (f64, f64) {
        if i == 0 || i + 1 >= self.x.len() {
            return (i as f64, self.value(i));
        }
        let (d, v) = parabolic(self.value(i - 1), self.value(i), self.value(i + 1));
        (i as f64 + d, v)
    }
}

/// Marks one peak per glottal cycle.
///
/// Each voiced run of at least [`MIN_RUN_FRAMES`] frames is seeded at the
/// largest absolute sample of its centre frame; the seed's sign fixes the
/// polarity. From the seed the walk steps one local period (taken from the
/// nearest voiced frame) forwards and backwards, each time picking the
/// largest polarity-adjusted sample within ±20 % of the prediction. Marks are
/// refined to sub-sample time and amplitude by a parabola through the
/// neighbouring samples. A run is split wherever two consecutive marks are
/// closer than `0.5 / f0_max` or further apart than `2 / f0_min`.
pub fn extract_pitch_marks(buf: &AudioBuffer, track: &PitchTrack) -> PitchMarks {
    let layout = track.layout;
    let rate = buf.sample_rate_hz as f64;
    let x = &buf.samples;
    let min_gap = 0.5 / track.f0_max_hz;
    let max_gap = 2.0 / track.f0_min_hz;
    let mut segments = Vec::new();

    for (first, last) in voiced_runs(track) {
        if last + 1 - first < MIN_RUN_FRAMES {
            continue;
        }
        let half_hop = layout.hop as f64 / 2.0;
        let centre_sample = |k: usize| layout.start(k) as f64 + layout.frame_len as f64 / 2.0;
        let lo = (centre_sample(first) - half_hop).max(0.0) as usize;
        let hi = ((centre_sample(last) + half_hop) as usize).min(x.len() - 1);

        let centre = (first + last) / 2;
        let start = layout.start(centre);
        let seed = (start..start + layout.frame_len)
            .reduce(|best, i| if x[i].abs() > x[best].abs() { i } else { best })
            .expect("frames are non-empty");
        if x[seed] == 0.0 {
            continue;
        }
        let walker = Walker {
            x,
            polarity: x[seed].signum(),
            lo,
            hi,
        };
        let period_at = |sample: f64| rate / track.f0_hz[layout.nearest_frame(sample, first, last)];

        let mut marks = vec![walker.refine(seed)];
        for direction in [1.0, -1.0] {
            let mut at = seed as f64;
            let mut found = Vec::new();
            loop {
                let period = period_at(at);
                let predicted = at + direction * period;
                let radius = SEARCH_FRACTION * period;
                let Some(i) = walker.peak_in(predicted - radius, predicted + radius) else {
                    break;
                };
                let (t, amp) = walker.refine(i);
                // the walk is leaving the periodic part: moving backwards or onto silence
                if (t - at) * direction <= 0.0 || amp <= 0.0 {
                    break;
                }
                found.push((t, amp));
                at = i as f64;
            }
            if direction < 0.0 {
                found.reverse();
                found.extend(marks);
                marks = found;
            } else {
                marks.extend(found);
            }
        }

        let mut segment = MarkSegment::default();
        let mut prev: Option<f64> = None;
        for (t, amp) in marks {
            let t = t / rate;
            if let Some(p) = prev {
                let gap = t - p;
                if gap < min_gap || gap > max_gap {
                    segments.push(std::mem::take(&mut segment));
                }
            }
            segment.mark_times_s.push(t);
            segment.peak_amps.push(amp);
            prev = Some(t);
        }
        segments.push(segment);
    }
    segments.retain(|s| !s.mark_times_s.is_empty());
    PitchMarks { segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::synth::{sine, sine_cycles};
    use crate::acoustic::{estimate_pitch, AcousticParams};

    fn marks_for(samples: Vec<f64>, rate: u32) -> PitchMarks {
        let buf = AudioBuffer::new(samples, rate);
        let track = estimate_pitch(&buf, &AcousticParams::default()).unwrap();
        extract_pitch_marks(&buf, &track)
    }

    #[test]
    fn sine_marks_are_one_period_apart() {
        let m = marks_for(sine(100.0, 0.5, 1.0, 16_000), 16_000);
        assert_eq!(m.segments.len(), 1);
        let spacing: Vec<f64> = m.segments[0].periods_s().iter().map(|p| p * 16_000.0).collect();
        assert!(spacing.len() > 90);
        for s in spacing {
            assert!((s - 160.0).abs() <= 2.0, "{s}");
        }
    }

    #[test]
    fn silence_has_no_marks() {
        let m = marks_for(vec![0.0; 16_000], 16_000);
        assert!(m.segments.is_empty());
    }

    #[test]
    fn alternating_amplitudes() {
        let periods = vec![0.01; 100];
        let m = marks_for(sine_cycles(&periods, &[0.5, 0.55], 16_000), 16_000);
        let seg = &m.segments[0];
        assert!(seg.peak_amps.len() > 80);
        for a in &seg.peak_amps {
            let near = if (a - 0.5).abs() < (a - 0.55).abs() { 0.5 } else { 0.55 };
            assert!((a - near).abs() / near < 0.02, "{a}");
        }
        for w in seg.peak_amps.windows(2) {
            assert!((w[0] - w[1]).abs() > 0.04);
        }
    }

    #[test]
    fn runs() {
        let buf = AudioBuffer::new(sine(100.0, 0.5, 0.3, 16_000), 16_000);
        let mut track = estimate_pitch(&buf, &AcousticParams::default()).unwrap();
        for i in [0, 5, 6, 7] {
            track.f0_hz[i] = 0.0;
        }
        let n = track.len();
        assert_eq!(voiced_runs(&track), vec![(1, 4), (8, n - 1)]);
    }
}
