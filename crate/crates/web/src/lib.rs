//! Browser bindings for three LPDS operations: filename inspection, text
//! cleaning and pitch analysis of a synthetic voice.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust so they can be tested natively.

use std::f64::consts::TAU;

use lpds_core::acoustic::{estimate_pitch, extract_pitch_marks, voice_report, AcousticParams, AudioBuffer, VoiceReport};
use lpds_core::name::{validate_name, NameProfile};
use lpds_core::text::{clean_text, CleaningFlags};
use lpds_core::{parse_name, serialize_name, Diagnostic};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Inspection {
    ok: bool,
    error: Option<String>,
    entities: Vec<(String, String)>,
    suffix: Option<String>,
    extension: Option<String>,
    canonical: Option<String>,
    diagnostics: Vec<Diagnostic>,
}

pub fn inspect_json(filename: &str) -> String {
    let out = match parse_name(filename) {
        Ok(name) => Inspection {
            ok: true,
            error: None,
            entities: name.entities().iter().map(|e| (e.key().to_string(), e.value().to_string())).collect(),
            suffix: name.suffix().map(str::to_string),
            extension: Some(name.extension().to_string()),
            canonical: Some(serialize_name(&name, true)),
            diagnostics: validate_name(&name, NameProfile::RawData, filename),
        },
        Err(e) => Inspection {
            ok: false,
            error: Some(e.to_string()),
            entities: Vec::new(),
            suffix: None,
            extension: None,
            canonical: None,
            diagnostics: Vec::new(),
        },
    };
    serde_json::to_string(&out).expect("serializable")
}

#[derive(Serialize)]
struct Cleaned<'a> {
    content: String,
    applied_steps: Vec<&'a str>,
}

pub fn clean_json(text: &str, flags: CleaningFlags) -> String {
    let c = clean_text(text, &flags);
    serde_json::to_string(&Cleaned {
        content: c.content,
        applied_steps: c.applied_steps,
    })
    .expect("serializable")
}

#[derive(Serialize)]
struct Analysis {
    sample_rate_hz: u32,
    samples: Vec<f32>,
    frame_times_s: Vec<f64>,
    f0_hz: Vec<f64>,
    intensity_dbfs: Vec<f64>,
    report: VoiceReport,
}

pub const DEMO_RATE: u32 = 16_000;

/// A vowel-like test signal: three harmonics on a pitch contour that
/// glides ±`glide_hz` around `f0_hz`, with cycle-to-cycle period and
/// amplitude alternation of `jitter_pct` and `shimmer_pct`.
pub fn synth_voice(f0_hz: f64, glide_hz: f64, jitter_pct: f64, shimmer_pct: f64, seconds: f64) -> Vec<f64> {
    let n = (seconds * DEMO_RATE as f64) as usize;
    let mut out = Vec::with_capacity(n);
    let mut t0 = 0.0;
    let mut cycle = 0usize;
    while out.len() < n {
        let sign = if cycle.is_multiple_of(2) { 1.0 } else { -1.0 };
        let f = f0_hz + glide_hz * (TAU * 0.5 * t0).sin();
        let period = (1.0 + sign * jitter_pct / 200.0) / f;
        let amp = 0.4 * (1.0 + sign * shimmer_pct / 200.0);
        let t1 = t0 + period;
        let mut k = (t0 * DEMO_RATE as f64).ceil() as usize;
        while (k as f64) < t1 * DEMO_RATE as f64 && out.len() < n {
            let theta = TAU * (k as f64 / DEMO_RATE as f64 - t0) / period;
            out.push(amp * (theta.sin() + 0.5 * (2.0 * theta).sin() + 0.25 * (3.0 * theta).sin()) / 1.75);
            k += 1;
        }
        t0 = t1;
        cycle += 1;
    }
    out
}

pub fn analyse_json(samples: Vec<f64>, rate: u32, params: &AcousticParams) -> String {
    let buf = AudioBuffer::new(samples, rate);
    match estimate_pitch(&buf, params) {
        Ok(track) => {
            let marks = extract_pitch_marks(&buf, &track);
            let report = voice_report(&buf, &track, &marks, params);
            serde_json::to_string(&Analysis {
                sample_rate_hz: rate,
                samples: buf.samples.iter().map(|s| *s as f32).collect(),
                frame_times_s: track.frame_times_s,
                f0_hz: track.f0_hz,
                intensity_dbfs: track.intensity_dbfs,
                report,
            })
            .expect("serializable")
        }
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[wasm_bindgen]
pub fn inspect_filename(filename: &str) -> String {
    inspect_json(filename)
}

#[wasm_bindgen]
pub fn clean(
    text: &str,
    remove_timestamps: bool,
    remove_special_chars: bool,
    remove_punctuation: bool,
    lowercase: bool,
    normalize_whitespace: bool,
) -> String {
    clean_json(
        text,
        CleaningFlags {
            remove_timestamps,
            remove_special_chars,
            remove_punctuation,
            lowercase,
            normalize_whitespace,
        },
    )
}

#[wasm_bindgen]
pub fn analyse_synthetic(f0_hz: f64, glide_hz: f64, jitter_pct: f64, shimmer_pct: f64, seconds: f64) -> String {
    let samples = synth_voice(f0_hz, glide_hz, jitter_pct, shimmer_pct, seconds.clamp(0.1, 10.0));
    analyse_json(samples, DEMO_RATE, &AcousticParams::default())
}
