//! Minimal RIFF/WAVE reader and writer for mono 16-bit signed PCM.
//!
//! Samples are scaled to [-1, 1] on read by dividing by 32768; on write they
//! are clamped to [-1, 1] and quantized with rounding, so a write/read
//! round-trip is exact to within one quantization step (1/32768).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Waveform;
use crate::error::{Error, Result};

const PCM_SCALE: f64 = 32768.0;

/// Read a mono 16-bit PCM WAV file.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut header = [0u8; 12];
    read_exact(&mut r, &mut header, path)?;
    if &header[0..4] != b"RIFF" || &header[8..12] != b"WAVE" {
        return Err(Error::Format(format!("{}: not a RIFF/WAVE file", path.display())));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<Vec<u8>> = None;

    loop {
        let mut chunk_header = [0u8; 8];
        match r.read(&mut chunk_header) {
            Ok(0) => break,
            Ok(n) if n < 8 => {
                return Err(Error::Format(format!("{}: truncated chunk header", path.display())))
            }
            Ok(_) => {}
            Err(e) => return Err(Error::io(path, e)),
        }
        let id = [chunk_header[0], chunk_header[1], chunk_header[2], chunk_header[3]];
        let size = u32::from_le_bytes(chunk_header[4..8].try_into().unwrap()) as usize;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Format(format!("{}: fmt chunk too short", path.display())));
                }
                let mut buf = vec![0u8; size];
                read_exact(&mut r, &mut buf, path)?;
                let format = u16::from_le_bytes(buf[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(buf[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(buf[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(buf[14..16].try_into().unwrap());
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => {
                let mut buf = vec![0u8; size];
                read_exact(&mut r, &mut buf, path)?;
                data = Some(buf);
            }
            _ => {
                // Skip unknown chunks (padded to even size).
                let skip = size + (size & 1);
                let mut buf = vec![0u8; skip];
                read_exact(&mut r, &mut buf, path)?;
            }
        }
        if fmt.is_some() && data.is_some() {
            break;
        }
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| Error::Format(format!("{}: missing fmt chunk", path.display())))?;
    let data =
        data.ok_or_else(|| Error::Format(format!("{}: missing data chunk", path.display())))?;

    if format != 1 || bits != 16 {
        return Err(Error::Format(format!(
            "{}: unsupported encoding (format tag {format}, {bits}-bit); expected 16-bit PCM",
            path.display()
        )));
    }
    if channels != 1 {
        return Err(Error::Format(format!(
            "{}: expected mono audio, got {channels} channels",
            path.display()
        )));
    }
    if rate == 0 {
        return Err(Error::Format(format!("{}: zero sample rate", path.display())));
    }
    if data.len() % 2 != 0 {
        return Err(Error::Format(format!("{}: odd data chunk length", path.display())));
    }

    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / PCM_SCALE)
        .collect();
    Ok(Waveform::new(samples, rate))
}

/// Write a waveform as mono 16-bit PCM. Out-of-range samples are clamped.
pub fn write_wav(w: &Waveform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);

    let data_len = (w.samples.len() * 2) as u32;
    let mut header = Vec::with_capacity(44);
    header.extend_from_slice(b"RIFF");
    header.extend_from_slice(&(36 + data_len).to_le_bytes());
    header.extend_from_slice(b"WAVE");
    header.extend_from_slice(b"fmt ");
    header.extend_from_slice(&16u32.to_le_bytes());
    header.extend_from_slice(&1u16.to_le_bytes()); // PCM
    header.extend_from_slice(&1u16.to_le_bytes()); // mono
    header.extend_from_slice(&w.sample_rate_hz.to_le_bytes());
    header.extend_from_slice(&(w.sample_rate_hz * 2).to_le_bytes()); // byte rate
    header.extend_from_slice(&2u16.to_le_bytes()); // block align
    header.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    header.extend_from_slice(b"data");
    header.extend_from_slice(&data_len.to_le_bytes());
    out.write_all(&header).map_err(|e| Error::io(path, e))?;

    for &s in &w.samples {
        let q = (s.clamp(-1.0, 1.0) * PCM_SCALE).round();
        let q = q.clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.write_all(&q.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Format(format!("{}: truncated file", path.display()))
        } else {
            Error::io(path, e)
        }
    })
}
