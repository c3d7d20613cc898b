//! RIFF/WAVE PCM 16-bit reader and writer.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::AudioBuffer;

pub const MIN_SAMPLE_RATE: u32 = 8_000;
pub const MAX_SAMPLE_RATE: u32 = 48_000;

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("MP3 audio is not supported; transcode to 16-bit PCM WAV")]
    Mp3NotSupported,
    #[error("not a RIFF/WAVE file")]
    NotRiff,
    #[error("missing `{0}` chunk")]
    MissingChunk(&'static str),
    #[error("unsupported codec (format tag {0:#06x}); only PCM is decoded")]
    UnsupportedCodec(u16),
    #[error("unsupported bit depth {0}; only 16-bit PCM is decoded")]
    UnsupportedBitDepth(u16),
    #[error("unsupported channel count {0}; expected 1 or 2")]
    UnsupportedChannelCount(u16),
    #[error("unsupported sample rate {0} Hz; expected 8000 to 48000")]
    UnsupportedSampleRate(u32),
    #[error("audio data is truncated")]
    TruncatedData,
}

fn u16_at(b: &[u8], at: usize) -> Option<u16> {
    b.get(at..at + 2).map(|s| u16::from_le_bytes([s[0], s[1]]))
}

fn u32_at(b: &[u8], at: usize) -> Option<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
}

pub fn decode_wav(path: &Path) -> Result<AudioBuffer, WavError> {
    let bytes = fs::read(path).map_err(|source| WavError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_wav_bytes(&bytes)
}

fn looks_like_mp3(bytes: &[u8]) -> bool {
    bytes.starts_with(b"ID3") || (bytes.len() >= 2 && bytes[0] == 0xFF && bytes[1] & 0xE0 == 0xE0)
}

pub fn decode_wav_bytes(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    if looks_like_mp3(bytes) {
        return Err(WavError::Mp3NotSupported);
    }
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotRiff);
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4).unwrap() as usize;
        let body_start = at + 8;
        let body_end = body_start.checked_add(size).ok_or(WavError::TruncatedData)?;
        match id {
            b"fmt " => {
                if size < 16 || body_end > bytes.len() {
                    return Err(WavError::TruncatedData);
                }
                let b = &bytes[body_start..body_end];
                let mut tag = u16_at(b, 0).unwrap();
                let channels = u16_at(b, 2).unwrap();
                let rate = u32_at(b, 4).unwrap();
                let bits = u16_at(b, 14).unwrap();
                if tag == FORMAT_EXTENSIBLE {
                    // sub-format GUID starts with the plain format tag
                    match u16_at(b, 24) {
                        Some(sub) if size >= 40 => tag = sub,
                        _ => return Err(WavError::UnsupportedCodec(FORMAT_EXTENSIBLE)),
                    }
                }
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => {
                if body_end > bytes.len() {
                    return Err(WavError::TruncatedData);
                }
                data = Some(&bytes[body_start..body_end]);
                break;
            }
            _ => {}
        }
        // chunks are padded to even sizes
        at = body_end + (size & 1);
    }

    let (tag, channels, rate, bits) = fmt.ok_or(WavError::MissingChunk("fmt "))?;
    if tag != FORMAT_PCM {
        return Err(WavError::UnsupportedCodec(tag));
    }
    if bits != 16 {
        return Err(WavError::UnsupportedBitDepth(bits));
    }
    if !(1..=2).contains(&channels) {
        return Err(WavError::UnsupportedChannelCount(channels));
    }
    if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&rate) {
        return Err(WavError::UnsupportedSampleRate(rate));
    }
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    let block = 2 * channels as usize;
    if data.len() % block != 0 {
        return Err(WavError::TruncatedData);
    }

    let samples = data
        .chunks_exact(block)
        .map(|frame| {
            let sum: f64 = frame
                .chunks_exact(2)
                .map(|s| i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0)
                .sum();
            sum / channels as f64
        })
        .collect();
    Ok(AudioBuffer::new(samples, rate))
}

/// Encodes interleaved samples in `[-1, 1]` as 16-bit PCM WAV.
pub fn encode_wav_pcm16(samples: &[f64], channels: u16, sample_rate: u32) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let block = 2 * channels as u32;
    out.extend_from_slice(&(sample_rate * block).to_le_bytes());
    out.extend_from_slice(&(block as u16).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silence_decodes_to_zeros() {
        let bytes = encode_wav_pcm16(&vec![0.0; 16_000], 1, 16_000);
        let buf = decode_wav_bytes(&bytes).unwrap();
        assert_eq!(buf.samples.len(), 16_000);
        assert!(buf.samples.iter().all(|&s| s == 0.0));
        assert_eq!(buf.duration_s(), 1.0);
    }

    #[test]
    fn stereo_downmix_is_channel_mean() {
        let interleaved: Vec<f64> = (0..2000).flat_map(|_| [0.5, -0.5]).collect();
        let buf = decode_wav_bytes(&encode_wav_pcm16(&interleaved, 2, 8000)).unwrap();
        assert_eq!(buf.samples.len(), 2000);
        assert!(buf.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn round_trip_within_one_lsb() {
        let samples: Vec<f64> = (0..4000)
            .map(|i| (i as f64 * 0.0123).sin() * 0.97)
            .chain([1.0, -1.0])
            .collect();
        let buf = decode_wav_bytes(&encode_wav_pcm16(&samples, 1, 22_050)).unwrap();
        for (a, b) in samples.iter().zip(&buf.samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(decode_wav_bytes(b"hello world!"), Err(WavError::NotRiff)));
        assert!(matches!(decode_wav_bytes(b"ID3\x03\0\0\0"), Err(WavError::Mp3NotSupported)));

        let good = encode_wav_pcm16(&[0.0; 100], 1, 16_000);
        let mut float = good.clone();
        float[20] = 3;
        assert!(matches!(decode_wav_bytes(&float), Err(WavError::UnsupportedCodec(3))));
        let mut bits = good.clone();
        bits[34] = 24;
        assert!(matches!(decode_wav_bytes(&bits), Err(WavError::UnsupportedBitDepth(24))));
        let mut chans = good.clone();
        chans[22] = 6;
        assert!(matches!(decode_wav_bytes(&chans), Err(WavError::UnsupportedChannelCount(6))));
        let rate = encode_wav_pcm16(&[0.0; 100], 1, 96_000);
        assert!(matches!(decode_wav_bytes(&rate), Err(WavError::UnsupportedSampleRate(96_000))));
        let truncated = &good[..good.len() - 10];
        assert!(matches!(decode_wav_bytes(truncated), Err(WavError::TruncatedData)));
    }

    #[test]
    fn skips_unknown_chunks() {
        let good = encode_wav_pcm16(&[0.25; 10], 1, 16_000);
        let mut with_list = good[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(b"abc\0");
        with_list.extend_from_slice(&good[36..]);
        let buf = decode_wav_bytes(&with_list).unwrap();
        assert_eq!(buf.samples, vec![0.25; 10]);
    }
}
