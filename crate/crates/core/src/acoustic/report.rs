//! Summary voice measures over a pitch track and its marks.

use serde::Serialize;

use super::marks::{voiced_runs, MarkSegment};
use super::{AcousticParams, AudioBuffer, PitchMarks, PitchTrack};

/// Segments with fewer periods than this are left out of jitter and shimmer.
pub const MIN_PERIODS: usize = 3;

/// Voice fields are `None` when the input has no voiced frame (or, for
/// jitter and shimmer, no mark segment long enough to measure).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoiceReport {
    pub mean_f0_hz: Option<f64>,
    pub sd_f0_hz: Option<f64>,
    pub jitter_local_pct: Option<f64>,
    pub shimmer_local_pct: Option<f64>,
    pub mean_intensity_dbfs: f64,
    pub sd_intensity_dbfs: f64,
    pub voiced_fraction: f64,
    pub pause_count: usize,
    pub total_pause_s: f64,
    pub duration_s: f64,
}

impl VoiceReport {
    pub fn has_voice(&self) -> bool {
        self.mean_f0_hz.is_some()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; 0 for a single value.
fn sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// `100 · mean|v_i − v_{i+1}| / mean v`.
fn local_perturbation(v: &[f64]) -> f64 {
    let diffs: f64 = v.windows(2).map(|w| (w[0] - w[1]).abs()).sum::<f64>() / (v.len() - 1) as f64;
    100.0 * diffs / mean(v)
}

/// Duration-weighted mean of a per-segment measure over segments with at
/// least [`MIN_PERIODS`] periods.
fn combine(segments: &[MarkSegment], measure: impl Fn(&MarkSegment) -> f64) -> Option<f64> {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for seg in segments {
        if seg.mark_times_s.len() < MIN_PERIODS + 1 {
            continue;
        }
        let d = seg.duration_s();
        weighted += d * measure(seg);
        total += d;
    }
    (total > 0.0).then(|| weighted / total)
}

/// Unvoiced runs strictly between voiced frames, as frame counts. Leading
/// and trailing silence is not a pause.
fn internal_gaps(track: &PitchTrack) -> Vec<usize> {
    voiced_runs(track).windows(2).map(|w| w[1].0 - w[0].1 - 1).collect()
}

/// Jitter and shimmer are the local (mean absolute consecutive difference
/// over mean) measures of mark periods and peak amplitudes, per segment,
/// then duration-weighted. A pause is an internal unvoiced run lasting at
/// least `pause_min_ms` (run length × hop).
pub fn voice_report(
    buf: &AudioBuffer,
    track: &PitchTrack,
    marks: &PitchMarks,
    params: &AcousticParams,
) -> VoiceReport {
    let f0 = track.voiced_f0();
    let (mean_f0_hz, sd_f0_hz) = if f0.is_empty() {
        (None, None)
    } else {
        (Some(mean(&f0)), Some(sd(&f0)))
    };
    let jitter = combine(&marks.segments, |s| local_perturbation(&s.periods_s()));
    let shimmer = combine(&marks.segments, |s| local_perturbation(&s.peak_amps));

    let hop_s = track.layout.hop_s();
    let pauses: Vec<f64> = internal_gaps(track)
        .into_iter()
        .map(|k| k as f64 * hop_s)
        .filter(|d| d * 1000.0 >= params.pause_min_ms - 1e-9)
        .collect();

    let frames = track.len().max(1) as f64;
    VoiceReport {
        mean_f0_hz,
        sd_f0_hz,
        jitter_local_pct: if f0.is_empty() { None } else { jitter },
        shimmer_local_pct: if f0.is_empty() { None } else { shimmer },
        mean_intensity_dbfs: mean(&track.intensity_dbfs),
        sd_intensity_dbfs: sd(&track.intensity_dbfs),
        voiced_fraction: f0.len() as f64 / frames,
        pause_count: pauses.len(),
        total_pause_s: pauses.iter().fold(0.0, |a, b| a + b),
        duration_s: buf.duration_s(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustic::synth::{onset_cycles, sine};
    use crate::acoustic::{estimate_pitch, extract_pitch_marks};

    fn report(samples: Vec<f64>, rate: u32) -> VoiceReport {
        let buf = AudioBuffer::new(samples, rate);
        let params = AcousticParams::default();
        let track = estimate_pitch(&buf, &params).unwrap();
        let marks = extract_pitch_marks(&buf, &track);
        voice_report(&buf, &track, &marks, &params)
    }

    #[test]
    fn clean_tone() {
        let r = report(sine(100.0, 0.5, 1.0, 16_000), 16_000);
        assert!(r.jitter_local_pct.unwrap() < 0.1, "{r:?}");
        assert!(r.shimmer_local_pct.unwrap() < 0.5, "{r:?}");
        assert!((r.mean_f0_hz.unwrap() - 100.0).abs() < 1.0);
        assert_eq!(r.pause_count, 0);
        assert_eq!(r.duration_s, 1.0);
    }

    #[test]
    fn alternating_periods() {
        let periods: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.0100 } else { 0.0102 }).collect();
        let r = report(onset_cycles(&periods, 0.5, 16_000), 16_000);
        let expected = 100.0 * 0.2 / 10.1;
        let got = r.jitter_local_pct.unwrap();
        assert!((got - expected).abs() / expected < 0.1, "{got}");
    }

    #[test]
    fn one_internal_pause() {
        let mut s = sine(150.0, 0.5, 1.0, 16_000);
        s.extend(vec![0.0; 6_400]);
        s.extend(sine(150.0, 0.5, 1.0, 16_000));
        let r = report(s, 16_000);
        assert_eq!(r.pause_count, 1);
        assert!((r.total_pause_s - 0.4).abs() <= 0.05, "{}", r.total_pause_s);
    }

    #[test]
    fn silence_has_no_voice_fields() {
        let r = report(vec![0.0; 16_000], 16_000);
        assert!(!r.has_voice());
        assert_eq!(r.jitter_local_pct, None);
        assert_eq!(r.voiced_fraction, 0.0);
        assert_eq!(r.mean_intensity_dbfs, -120.0);
        assert_eq!(r.pause_count, 0);
    }
}
