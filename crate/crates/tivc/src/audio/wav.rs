//! RIFF PCM WAV reading and writing: 16-bit little-endian, mono only.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::Waveform;
use crate::error::{Error, Result};

pub(crate) fn f64_to_i16(s: f64) -> i16 {
    let clipped = s.clamp(-1.0, 1.0);
    // Symmetric scaling by 32767 so that +1.0 maps to full scale.
    (clipped * 32767.0).round() as i16
}

pub(crate) fn i16_to_f64(v: i16) -> f64 {
    v as f64 / 32767.0
}

/// Write `w` as a 16-bit mono PCM WAV file. Samples are clipped to [-1, 1]
/// before quantization.
pub fn save_wav(w: &Waveform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let data_len = (w.samples.len() * 2) as u32;
    let byte_rate = w.sample_rate * 2;

    let r = (|| -> std::io::Result<()> {
        out.write_all(b"RIFF")?;
        out.write_u32::<LittleEndian>(36 + data_len)?;
        out.write_all(b"WAVE")?;
        out.write_all(b"fmt ")?;
        out.write_u32::<LittleEndian>(16)?;
        out.write_u16::<LittleEndian>(1)?; // PCM
        out.write_u16::<LittleEndian>(1)?; // mono
        out.write_u32::<LittleEndian>(w.sample_rate)?;
        out.write_u32::<LittleEndian>(byte_rate)?;
        out.write_u16::<LittleEndian>(2)?; // block align
        out.write_u16::<LittleEndian>(16)?; // bits per sample
        out.write_all(b"data")?;
        out.write_u32::<LittleEndian>(data_len)?;
        for &s in &w.samples {
            out.write_i16::<LittleEndian>(f64_to_i16(s))?;
        }
        out.flush()
    })();
    r.map_err(|e| Error::io(path, e))
}

/// Load a 16-bit mono PCM WAV file. Samples come back scaled to [-1, 1].
pub fn load_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let bad = |reason: &str| Error::WavFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    let mut tag = [0u8; 4];
    r.read_exact(&mut tag)
        .map_err(|_| bad("truncated header"))?;
    if &tag != b"RIFF" {
        return Err(bad("missing RIFF tag"));
    }
    r.read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated header"))?;
    r.read_exact(&mut tag)
        .map_err(|_| bad("truncated header"))?;
    if &tag != b"WAVE" {
        return Err(bad("missing WAVE tag"));
    }

    // Walk chunks; fmt must appear before data.
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    loop {
        if r.read_exact(&mut tag).is_err() {
            return Err(bad("no data chunk"));
        }
        let size = r
            .read_u32::<LittleEndian>()
            .map_err(|_| bad("truncated chunk header"))?;
        match &tag {
            b"fmt " => {
                if size < 16 {
                    return Err(bad("fmt chunk too small"));
                }
                let audio_format = r.read_u16::<LittleEndian>().map_err(|_| bad("fmt"))?;
                let channels = r.read_u16::<LittleEndian>().map_err(|_| bad("fmt"))?;
                let sample_rate = r.read_u32::<LittleEndian>().map_err(|_| bad("fmt"))?;
                r.read_u32::<LittleEndian>().map_err(|_| bad("fmt"))?; // byte rate
                r.read_u16::<LittleEndian>().map_err(|_| bad("fmt"))?; // block align
                let bits = r.read_u16::<LittleEndian>().map_err(|_| bad("fmt"))?;
                let mut rest = vec![0u8; size as usize - 16];
                r.read_exact(&mut rest).map_err(|_| bad("fmt"))?;
                fmt = Some((audio_format, channels, sample_rate, bits));
            }
            b"data" => {
                let (audio_format, channels, sample_rate, bits) =
                    fmt.ok_or_else(|| bad("data chunk before fmt chunk"))?;
                let unsupported = |reason: String| Error::WavUnsupported {
                    path: path.to_path_buf(),
                    reason,
                };
                if audio_format != 1 {
                    return Err(unsupported(format!("non-PCM format code {audio_format}")));
                }
                if channels != 1 {
                    return Err(unsupported(format!("{channels} channels, expected mono")));
                }
                if bits != 16 {
                    return Err(unsupported(format!("{bits}-bit samples, expected 16")));
                }
                if size % 2 != 0 {
                    return Err(bad("odd data chunk size"));
                }
                let n = size as usize / 2;
                let mut samples = Vec::with_capacity(n);
                for _ in 0..n {
                    let v = r
                        .read_i16::<LittleEndian>()
                        .map_err(|_| bad("truncated data chunk"))?;
                    samples.push(i16_to_f64(v));
                }
                return Ok(Waveform::new(samples, sample_rate));
            }
            _ => {
                // Skip unknown chunk (word-aligned).
                let skip = size as usize + (size as usize & 1);
                let mut buf = vec![0u8; skip];
                r.read_exact(&mut buf).map_err(|_| bad("truncated chunk"))?;
            }
        }
    }
}
