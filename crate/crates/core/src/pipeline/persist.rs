//! Model file layout:
//!
//! ```text
//! "NIDM" | version u16 | section* | crc32c u32
//! section = tag [4 bytes] | payload length u64 | payload
//! ```
//!
//! All integers and reals are little-endian; strings are a u32 byte length
//! followed by UTF-8. The checksum covers every byte before it. Sections
//! appear in the fixed order CONF, FEAT, LABL, ENCD, SCAL, WGHT, HIST.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{assemble_cnn_lstm, EpochStats, History, ModelConfig, TrainedModel};
use crate::error::{Error, Result};
use crate::featsel::ScalerParams;
use crate::flowdata::{CategoricalTable, Level, Profile};

pub const MAGIC: [u8; 4] = *b"NIDM";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Default)]
struct Out(Vec<u8>);

impl Out {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn strs(&mut self, v: &[String]) {
        self.u32(v.len() as u32);
        v.iter().for_each(|s| self.str(s));
    }
    fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.f64(x));
    }
    fn section(&mut self, tag: &[u8; 4], body: Out) {
        self.0.extend_from_slice(tag);
        self.u64(body.0.len() as u64);
        self.0.extend_from_slice(&body.0);
    }
}

struct In<'a> {
    buf: &'a [u8],
    what: &'static str,
}

impl<'a> In<'a> {
    fn corrupt(&self, detail: &str) -> Error {
        Error::Corrupt(format!("{} section: {detail}", self.what))
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(self.corrupt("unexpected end of data"));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| self.corrupt("invalid UTF-8"))
    }
    fn count(&mut self, wide: bool, item_size: usize) -> Result<usize> {
        let n = if wide { self.u64()? as usize } else { self.u32()? as usize };
        // Every item takes at least `item_size` bytes; reject impossible counts early.
        if n.saturating_mul(item_size) > self.buf.len() {
            return Err(self.corrupt("count exceeds payload"));
        }
        Ok(n)
    }
    fn strs(&mut self) -> Result<Vec<String>> {
        let n = self.count(false, 4)?;
        (0..n).map(|_| self.str()).collect()
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.count(true, 8)?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn section(&mut self, tag: &[u8; 4], what: &'static str) -> Result<In<'a>> {
        let found = self.take(4)?;
        if found != tag {
            return Err(Error::Corrupt(format!(
                "expected section {}, found {:?}",
                String::from_utf8_lossy(tag),
                String::from_utf8_lossy(found)
            )));
        }
        let n = self.u64()? as usize;
        Ok(In { buf: self.take(n)?, what })
    }
    fn finish(&self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(self.corrupt("trailing bytes"))
        }
    }
}

pub fn model_to_bytes(model: &TrainedModel) -> Vec<u8> {
    let mut out = Out::default();
    out.0.extend_from_slice(&MAGIC);
    out.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());

    let mut s = Out::default();
    s.str(&model.config.to_text());
    out.section(b"CONF", s);

    let mut s = Out::default();
    s.strs(&model.features);
    out.section(b"FEAT", s);

    let mut s = Out::default();
    s.str(model.profile.as_str());
    match &model.label_rules {
        Some(rules) => {
            s.u8(1);
            s.str(rules);
        }
        None => s.u8(0),
    }
    s.strs(&model.class_names);
    out.section(b"LABL", s);

    let mut s = Out::default();
    s.u32(model.encodings.len() as u32);
    for t in &model.encodings {
        s.str(&t.column);
        s.u32(t.levels.len() as u32);
        for level in &t.levels {
            match level {
                Level::Number(v) => {
                    s.u8(0);
                    s.f64(*v);
                }
                Level::Text(text) => {
                    s.u8(1);
                    s.str(text);
                }
            }
        }
    }
    out.section(b"ENCD", s);

    let mut s = Out::default();
    s.strs(&model.scaler.names);
    s.f64s(&model.scaler.min);
    s.f64s(&model.scaler.max);
    out.section(b"SCAL", s);

    let mut s = Out::default();
    s.f64s(&model.network.flat_params());
    out.section(b"WGHT", s);

    let mut s = Out::default();
    s.u32(model.history.epochs.len() as u32);
    for e in &model.history.epochs {
        s.f64(e.loss);
        s.f64(e.accuracy);
    }
    out.section(b"HIST", s);

    let crc = crc32c::crc32c(&out.0);
    out.u32(crc);
    out.0
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<TrainedModel> {
    if bytes.len() < MAGIC.len() || bytes[..4] != MAGIC {
        return Err(Error::Format);
    }
    if bytes.len() < 6 {
        return Err(Error::Corrupt("file ends inside the header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < 10 {
        return Err(Error::Corrupt("file ends before the checksum".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32c::crc32c(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = In { buf: &body[6..], what: "header" };

    let mut s = r.section(b"CONF", "config")?;
    let config = ModelConfig::from_text(&s.str()?).map_err(|e| Error::Corrupt(format!("config section: {e}")))?;
    s.finish()?;

    let mut s = r.section(b"FEAT", "features")?;
    let features = s.strs()?;
    s.finish()?;

    let mut s = r.section(b"LABL", "labels")?;
    let profile: Profile = s.str()?.parse().map_err(|_| s.corrupt("unknown profile"))?;
    let label_rules = match s.u8()? {
        0 => None,
        1 => Some(s.str()?),
        _ => return Err(s.corrupt("bad rules flag")),
    };
    let class_names = s.strs()?;
    s.finish()?;

    let mut s = r.section(b"ENCD", "encodings")?;
    let n = s.count(false, 8)?;
    let mut encodings = Vec::with_capacity(n);
    for _ in 0..n {
        let column = s.str()?;
        let k = s.count(false, 5)?;
        let mut levels = Vec::with_capacity(k);
        for _ in 0..k {
            levels.push(match s.u8()? {
                0 => Level::Number(s.f64()?),
                1 => Level::Text(s.str()?),
                _ => return Err(s.corrupt("bad level tag")),
            });
        }
        encodings.push(CategoricalTable { column, levels });
    }
    s.finish()?;

    let mut s = r.section(b"SCAL", "scaler")?;
    let scaler = ScalerParams {
        names: s.strs()?,
        min: s.f64s()?,
        max: s.f64s()?,
    };
    s.finish()?;
    if scaler.names != features || scaler.min.len() != features.len() || scaler.max.len() != features.len() {
        return Err(Error::Corrupt("scaler does not match the feature list".into()));
    }

    let mut s = r.section(b"WGHT", "weights")?;
    let weights = s.f64s()?;
    s.finish()?;
    let mut network = assemble_cnn_lstm(&config, features.len(), class_names.len())
        .map_err(|e| Error::Corrupt(format!("architecture: {e}")))?;
    network
        .set_flat_params(&weights)
        .map_err(|e| Error::Corrupt(format!("weights section: {e}")))?;

    let mut s = r.section(b"HIST", "history")?;
    let n = s.count(false, 16)?;
    let mut history = History::default();
    for _ in 0..n {
        history.epochs.push(EpochStats {
            loss: s.f64()?,
            accuracy: s.f64()?,
        });
    }
    s.finish()?;
    r.finish()?;

    Ok(TrainedModel {
        config,
        network,
        features,
        class_names,
        profile,
        label_rules,
        encodings,
        scaler,
        history,
    })
}

pub fn save_model<W: Write>(model: &TrainedModel, mut sink: W) -> Result<()> {
    sink.write_all(&model_to_bytes(model))?;
    sink.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(mut source: R) -> Result<TrainedModel> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    model_from_bytes(&bytes)
}

pub fn save_model_file(model: &TrainedModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model_file(path: &Path) -> Result<TrainedModel> {
    model_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{fit, ConvBlock, FitOptions};
    use crate::synth::separable_blobs;

    fn fixture() -> (TrainedModel, crate::flowdata::Dataset) {
        let data = separable_blobs(80, 8, 3);
        let options = FitOptions {
            select: None,
            resample: None,
            model: ModelConfig {
                conv: vec![ConvBlock { filters: 3, kernel: 3, pool: 2 }],
                dropout: vec![0.1],
                lstm: vec![4],
                epochs: 3,
                batch_size: 8,
                learning_rate: 0.01,
                seed: 2,
            },
            ..FitOptions::default()
        };
        let out = fit(&data, None, &options).unwrap();
        (out.model, out.test)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let (model, test) = fixture();
        let bytes = model_to_bytes(&model);
        assert_eq!(&bytes[..4], b"NIDM");
        let back = model_from_bytes(&bytes).unwrap();
        assert_eq!(back, model);
        let a = model.predict(&test).unwrap();
        let b = back.predict(&test).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let xs: Vec<u64> = x.distribution.iter().map(|v| v.to_bits()).collect();
            let ys: Vec<u64> = y.distribution.iter().map(|v| v.to_bits()).collect();
            assert_eq!(xs, ys);
        }
        assert_eq!(model_to_bytes(&back), bytes);
    }

    #[test]
    fn damage_is_detected() {
        let (model, _) = fixture();
        let bytes = model_to_bytes(&model);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(model_from_bytes(&bad), Err(Error::Format)));

        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(model_from_bytes(&bad), Err(Error::Version { found: 9, expected: 1 })));

        for at in [6, bytes.len() / 2, bytes.len() - 5] {
            let mut bad = bytes.clone();
            bad[at] ^= 0x40;
            assert!(matches!(model_from_bytes(&bad), Err(Error::Checksum { .. })), "offset {at}");
        }

        for cut in [3, 8, bytes.len() / 3, bytes.len() - 1] {
            let r = model_from_bytes(&bytes[..cut]);
            assert!(
                matches!(r, Err(Error::Checksum { .. } | Error::Corrupt(_) | Error::Format)),
                "cut {cut}: {r:?}"
            );
        }
    }
}
