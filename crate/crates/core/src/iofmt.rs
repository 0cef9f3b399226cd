//! Instance file format: a line-based text header plus row-major payloads.
//!
//! Adversarial instances are pure functions of their header and bit payload,
//! so only those are stored and the stream is regenerated on load; benign
//! streams store their triples explicitly. Floats are written with Rust's
//! shortest round-trip formatting, so write -> read -> write is byte-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instances::{
    build_benign, build_index_instance, build_time_family, build_time_sigma,
    build_window_instance, BitMatrix, HardInstance, InstanceKind,
};
use crate::vector::{TokenTriple, Vector};

const MAGIC: &str = "attnsketch-instance v1";

/// Serializes an instance to its text form.
pub fn instance_to_string(inst: &HardInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "kind = {}", inst.kind.name());
    let _ = writeln!(out, "n = {}", inst.n);
    let _ = writeln!(out, "d = {}", inst.d);
    if let Some(w) = inst.w {
        let _ = writeln!(out, "w = {w}");
    }
    let _ = writeln!(out, "eps = {}", inst.eps);
    let _ = writeln!(out, "eta = {}", inst.eta);
    let _ = writeln!(out, "c = {}", inst.c);
    let _ = writeln!(out, "seed = {}", inst.projector_seed);
    if let Some(i) = inst.planted_index {
        let _ = writeln!(out, "planted = {i}");
    }
    if let Some(bits) = &inst.bits {
        let _ = writeln!(out, "bits =");
        for r in 0..bits.rows() {
            for c in 0..bits.cols() {
                let _ = write!(out, "{}", bits.get(r, c));
            }
            out.push('\n');
        }
    }
    if inst.kind == InstanceKind::Benign {
        let _ = writeln!(out, "stream =");
        for t in &inst.stream {
            let _ = writeln!(
                out,
                "{} ; {} ; {}",
                join_floats(t.q.as_slice()),
                join_floats(t.k.as_slice()),
                join_floats(t.v.as_slice())
            );
        }
    }
    let _ = writeln!(out, "end");
    out
}

pub fn write_instance(path: &Path, inst: &HardInstance) -> Result<()> {
    fs::write(path, instance_to_string(inst))?;
    Ok(())
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

struct Header {
    kind: InstanceKind,
    n: usize,
    d: usize,
    w: Option<usize>,
    eps: f64,
    eta: f64,
    c: f64,
    seed: u64,
    planted: Option<usize>,
}

/// Parses the text form back into an instance, regenerating derived streams.
pub fn instance_from_str(text: &str) -> Result<HardInstance> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::Parse(format!("missing magic line '{MAGIC}'")));
    }

    let mut header = Header {
        kind: InstanceKind::Benign,
        n: 0,
        d: 0,
        w: None,
        eps: 0.0,
        eta: 0.0,
        c: 0.0,
        seed: 0,
        planted: None,
    };
    let mut kind_seen = false;
    let mut bit_rows: Vec<String> = Vec::new();
    let mut stream_rows: Vec<String> = Vec::new();

    enum Section {
        Header,
        Bits,
        Stream,
    }
    let mut section = Section::Header;
    let mut ended = false;

    for line in lines {
        let line = line.trim_end();
        if line == "end" {
            ended = true;
            break;
        }
        match section {
            Section::Header => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected 'key = value', got '{line}'")))?;
                let key = key.trim();
                let value = value.trim();
                match key {
                    "kind" => {
                        header.kind = InstanceKind::parse(value)?;
                        kind_seen = true;
                    }
                    "n" => header.n = parse_num(key, value)?,
                    "d" => header.d = parse_num(key, value)?,
                    "w" => header.w = Some(parse_num(key, value)?),
                    "eps" => header.eps = parse_float(key, value)?,
                    "eta" => header.eta = parse_float(key, value)?,
                    "c" => header.c = parse_float(key, value)?,
                    "seed" => header.seed = parse_num(key, value)?,
                    "planted" => header.planted = Some(parse_num(key, value)?),
                    "bits" => section = Section::Bits,
                    "stream" => section = Section::Stream,
                    other => return Err(Error::Parse(format!("unknown header key '{other}'"))),
                }
            }
            Section::Bits => {
                if let Some(rest) = line.strip_prefix("stream =") {
                    if !rest.trim().is_empty() {
                        return Err(Error::Parse("malformed stream section header".into()));
                    }
                    section = Section::Stream;
                } else {
                    bit_rows.push(line.to_string());
                }
            }
            Section::Stream => stream_rows.push(line.to_string()),
        }
    }
    if !ended {
        return Err(Error::Parse("missing 'end' line".into()));
    }
    if !kind_seen {
        return Err(Error::Parse("missing 'kind' header".into()));
    }

    let inst = match header.kind {
        InstanceKind::IndexReduction => {
            let bits = parse_bits(&bit_rows, header.n, header.d)?;
            build_index_instance(&bits, header.eps, header.seed)?
        }
        InstanceKind::WindowReduction => {
            let w = header.w.ok_or_else(|| Error::Parse("window instance needs 'w'".into()))?;
            let bits = parse_bits(&bit_rows, w, header.d)?;
            build_window_instance(&bits, header.n, w, header.eps, header.eta, header.seed)?
        }
        InstanceKind::TimeFamily => {
            let i = header
                .planted
                .ok_or_else(|| Error::Parse("time-family instance needs 'planted'".into()))?;
            build_time_family(header.n, header.d, i)?
        }
        InstanceKind::TimeSigma => build_time_sigma(header.n, header.d)?,
        InstanceKind::Benign => {
            let stream = parse_stream(&stream_rows, header.n, header.d)?;
            let mut inst = build_benign(header.n, header.d, header.seed)?;
            inst.stream = stream;
            inst
        }
    };

    // Derived constants must agree with the header; a mismatch means a
    // corrupt or hand-edited file.
    if (inst.c - header.c).abs() > 1e-12 {
        return Err(Error::Parse(format!(
            "header c = {} disagrees with regenerated c = {}",
            header.c, inst.c
        )));
    }
    Ok(inst)
}

pub fn read_instance(path: &Path) -> Result<HardInstance> {
    let text = fs::read_to_string(path)?;
    instance_from_str(&text)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse(format!("bad value for '{key}': '{value}'")))
}

fn parse_float(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Parse(format!("bad value for '{key}': '{value}'")))
}

fn parse_bits(rows: &[String], expect_rows: usize, expect_cols: usize) -> Result<BitMatrix> {
    if rows.len() != expect_rows {
        return Err(Error::Parse(format!(
            "expected {expect_rows} bit rows, got {}",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(expect_rows * expect_cols);
    for row in rows {
        if row.len() != expect_cols {
            return Err(Error::Parse(format!(
                "expected {expect_cols} bits per row, got {}",
                row.len()
            )));
        }
        for ch in row.chars() {
            match ch {
                '0' => data.push(0),
                '1' => data.push(1),
                other => return Err(Error::Parse(format!("bad bit character '{other}'"))),
            }
        }
    }
    BitMatrix::new(expect_rows, expect_cols, data)
}

fn parse_stream(rows: &[String], n: usize, d: usize) -> Result<Vec<TokenTriple>> {
    if rows.len() != n {
        return Err(Error::Parse(format!("expected {n} stream rows, got {}", rows.len())));
    }
    let mut stream = Vec::with_capacity(n);
    for row in rows {
        let parts: Vec<&str> = row.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("stream row needs 'q ; k ; v', got '{row}'")));
        }
        let parse_vec = |s: &str| -> Result<Vector> {
            let comps: Vec<f64> = s
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad float '{t}' in stream row")))
                })
                .collect::<Result<_>>()?;
            if comps.len() != d {
                return Err(Error::Parse(format!(
                    "stream vector has {} components, expected {d}",
                    comps.len()
                )));
            }
            Vector::new(comps)
        };
        stream.push(TokenTriple::new(parse_vec(parts[0])?, parse_vec(parts[1])?, parse_vec(parts[2])?)?);
    }
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit;

    fn roundtrip(inst: &HardInstance) {
        let text = instance_to_string(inst);
        let parsed = instance_from_str(&text).unwrap();
        assert_eq!(parsed.kind, inst.kind);
        assert_eq!(parsed.stream, inst.stream, "regenerated stream must be bit-identical");
        let text2 = instance_to_string(&parsed);
        assert_eq!(text, text2, "round-trip must be byte-stable");
    }

    #[test]
    fn index_instance_roundtrip() {
        let mut rng = randkit::chacha(1);
        let x = BitMatrix::random(8, 12, &mut rng).unwrap();
        roundtrip(&build_index_instance(&x, 0.1, 77).unwrap());
    }

    #[test]
    fn window_instance_roundtrip() {
        let mut rng = randkit::chacha(2);
        let x = BitMatrix::random(4, 6, &mut rng).unwrap();
        roundtrip(&build_window_instance(&x, 16, 4, 0.2, 0.5, 3).unwrap());
    }

    #[test]
    fn time_instances_roundtrip() {
        roundtrip(&build_time_family(16, 4, 5).unwrap());
        roundtrip(&build_time_sigma(16, 4).unwrap());
    }

    #[test]
    fn benign_instance_roundtrip() {
        roundtrip(&build_benign(20, 3, 123).unwrap());
    }

    #[test]
    fn corrupt_inputs_rejected() {
        assert!(instance_from_str("nonsense").is_err());
        let mut rng = randkit::chacha(3);
        let x = BitMatrix::random(4, 4, &mut rng).unwrap();
        let inst = build_index_instance(&x, 0.1, 1).unwrap();
        let text = instance_to_string(&inst);
        assert!(instance_from_str(&text.replace("end\n", "")).is_err());
        // flip a header constant: the regenerated c will disagree
        let broken = text.replace(&format!("c = {}", inst.c), "c = 1.0");
        assert!(instance_from_str(&broken).is_err());
    }
}
