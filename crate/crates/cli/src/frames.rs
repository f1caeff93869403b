//! Bit and LLR frame I/O. Frames use the `(p - 1) * Q + l` flattening.

use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BitFormat {
    /// One frame per line of `0`/`1` characters.
    Bits,
    /// One frame per line of hex digits, MSB first, zero-padded at the end.
    Hex,
    /// Packed bytes, MSB first, each frame padded to a whole byte.
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LlrFormat {
    /// One frame per line, comma-separated.
    Csv,
    /// Little-endian float32, frame-major.
    F32,
}

fn text_lines(input: &mut dyn BufRead) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push((i + 1, t.to_string()));
    }
    Ok(out)
}

pub fn read_bits(input: &mut dyn BufRead, format: BitFormat, len: usize) -> Result<Vec<Vec<u8>>> {
    match format {
        BitFormat::Bits => text_lines(input)?
            .into_iter()
            .map(|(no, t)| {
                let bits: Vec<u8> = t
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => bail!("line {no}: unexpected character {c:?}"),
                    })
                    .collect::<Result<_>>()?;
                if bits.len() != len {
                    bail!("line {no}: expected {len} bits, got {}", bits.len());
                }
                Ok(bits)
            })
            .collect(),
        BitFormat::Hex => text_lines(input)?
            .into_iter()
            .map(|(no, t)| {
                let digits = len.div_ceil(4);
                if t.len() != digits {
                    bail!("line {no}: expected {digits} hex digits, got {}", t.len());
                }
                let mut bits = Vec::with_capacity(digits * 4);
                for c in t.chars() {
                    let v = c.to_digit(16).with_context(|| format!("line {no}: bad hex digit {c:?}"))?;
                    bits.extend((0..4).rev().map(|k| ((v >> k) & 1) as u8));
                }
                bits.truncate(len);
                Ok(bits)
            })
            .collect(),
        BitFormat::Bin => {
            let mut raw = Vec::new();
            input.read_to_end(&mut raw)?;
            let per = len.div_ceil(8);
            if per == 0 || raw.len() % per != 0 {
                bail!("binary input of {} bytes is not a whole number of {per}-byte frames", raw.len());
            }
            Ok(raw
                .chunks(per)
                .map(|chunk| {
                    let mut bits: Vec<u8> = chunk.iter().flat_map(|b| (0..8).rev().map(move |k| (b >> k) & 1)).collect();
                    bits.truncate(len);
                    bits
                })
                .collect())
        }
    }
}

pub fn write_bits(out: &mut dyn Write, format: BitFormat, frames: &[Vec<u8>]) -> Result<()> {
    for frame in frames {
        match format {
            BitFormat::Bits => {
                let s: String = frame.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
                writeln!(out, "{s}")?;
            }
            BitFormat::Hex => {
                let s: String = frame
                    .chunks(4)
                    .map(|c| {
                        let v = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << (3 - i)));
                        char::from_digit(v, 16).unwrap_or('0')
                    })
                    .collect();
                writeln!(out, "{s}")?;
            }
            BitFormat::Bin => {
                let bytes: Vec<u8> = frame
                    .chunks(8)
                    .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
                    .collect();
                out.write_all(&bytes)?;
            }
        }
    }
    Ok(())
}

pub fn read_llrs(input: &mut dyn BufRead, format: LlrFormat, len: usize) -> Result<Vec<Vec<f64>>> {
    match format {
        LlrFormat::Csv => text_lines(input)?
            .into_iter()
            .map(|(no, t)| {
                let vals: Vec<f64> = t
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().with_context(|| format!("line {no}: bad LLR {v:?}")))
                    .collect::<Result<_>>()?;
                if vals.len() != len {
                    bail!("line {no}: expected {len} LLRs, got {}", vals.len());
                }
                Ok(vals)
            })
            .collect(),
        LlrFormat::F32 => {
            let mut raw = Vec::new();
            input.read_to_end(&mut raw)?;
            let per = 4 * len;
            if raw.len() % per != 0 {
                bail!("binary input of {} bytes is not a whole number of {len}-value frames", raw.len());
            }
            Ok(raw
                .chunks(per)
                .map(|frame| {
                    frame
                        .chunks_exact(4)
                        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
                        .collect()
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_formats_round_trip() {
        let frames = vec![vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1], vec![0; 10]];
        for format in [BitFormat::Bits, BitFormat::Hex, BitFormat::Bin] {
            let mut buf = Vec::new();
            write_bits(&mut buf, format, &frames).unwrap();
            let back = read_bits(&mut buf.as_slice(), format, 10).unwrap();
            assert_eq!(back, frames, "{format:?}");
        }
    }

    #[test]
    fn hex_is_msb_first() {
        let mut buf = Vec::new();
        write_bits(&mut buf, BitFormat::Hex, &[vec![1, 0, 0, 0, 0, 0, 0, 1]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "81\n");
    }

    #[test]
    fn llr_formats() {
        let csv = "# comment\n1.5, -2, 0\n3,3,3\n";
        let v = read_llrs(&mut csv.as_bytes(), LlrFormat::Csv, 3).unwrap();
        assert_eq!(v, vec![vec![1.5, -2.0, 0.0], vec![3.0; 3]]);
        assert!(read_llrs(&mut "1,2\n".as_bytes(), LlrFormat::Csv, 3).is_err());

        let raw: Vec<u8> = [1.0f32, -0.5, 2.0, 4.0].iter().flat_map(|x| x.to_le_bytes()).collect();
        let v = read_llrs(&mut raw.as_slice(), LlrFormat::F32, 2).unwrap();
        assert_eq!(v, vec![vec![1.0, -0.5], vec![2.0, 4.0]]);
        assert!(read_llrs(&mut raw[..6].as_ref(), LlrFormat::F32, 2).is_err());
    }

    #[test]
    fn rejects_bad_bits() {
        assert!(read_bits(&mut "0102\n".as_bytes(), BitFormat::Bits, 4).is_err());
        assert!(read_bits(&mut "01\n".as_bytes(), BitFormat::Bits, 4).is_err());
        assert!(read_bits(&mut "g\n".as_bytes(), BitFormat::Hex, 4).is_err());
    }
}
