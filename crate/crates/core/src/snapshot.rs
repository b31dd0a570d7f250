//! Binary snapshots of built sketches.
//!
//! All integers are little-endian. An SBG snapshot is
//!
//! ```text
//! "SBGS" version:u32 L:u32 P:u32 d:u32 P_ranks:u32 budget:u64 seed:u64 mode:u8 flags:u8
//! rank table: P_ranks * (L - 1) bytes
//! cells, layer-major then label, row, col: rank:u8 aggregate:f64
//! ```
//!
//! and a TCM snapshot is
//!
//! ```text
//! "TCMS" version:u32 L:u32 P:u32 d:u32 budget:u64 seed:u64 mode:u8
//! cells, layer-major then label, row, col: aggregate:f64
//! ```
//!
//! Hash functions are not stored; they are re-derived from the seed.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, SketchError};
use crate::query::GraphSketch;
use crate::rank::RankTable;
use crate::sketch::{AggregateMode, Cell, SbgSketch, SketchConfig};
use crate::tcm::{TcmConfig, TcmSketch};

pub const SBG_MAGIC: [u8; 4] = *b"SBGS";
pub const TCM_MAGIC: [u8; 4] = *b"TCMS";
pub const VERSION: u32 = 1;

const FLAG_FIRST_ARRIVAL: u8 = 1;

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| SketchError::Snapshot(format!("{v} does not fit in 32 bits")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

struct Input<R> {
    inner: R,
}

impl<R: Read> Input<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => SketchError::Snapshot("truncated snapshot".into()),
            _ => SketchError::Io(e),
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes()?) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn vec(&mut self, len: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; len];
        self.inner.read_exact(&mut buf).map_err(|_| SketchError::Snapshot("truncated snapshot".into()))?;
        Ok(buf)
    }

    fn finish(mut self) -> Result<()> {
        let mut rest = [0u8; 1];
        match self.inner.read(&mut rest)? {
            0 => Ok(()),
            _ => Err(SketchError::Snapshot("trailing bytes after snapshot".into())),
        }
    }
}

fn check_version(input: &mut Input<impl Read>) -> Result<()> {
    let version = input.u32()?;
    if version != VERSION as usize {
        return Err(SketchError::Snapshot(format!("unsupported snapshot version {version}")));
    }
    Ok(())
}

fn mode_from(byte: u8) -> Result<AggregateMode> {
    AggregateMode::from_byte(byte).ok_or_else(|| SketchError::Snapshot(format!("unknown aggregate mode {byte}")))
}

pub fn write_sbg<W: Write>(out: &mut W, sketch: &SbgSketch) -> Result<()> {
    let cfg = sketch.config();
    let (l, d) = (sketch.num_labels(), sketch.dimension());
    out.write_all(&SBG_MAGIC)?;
    put_u32(out, VERSION as usize)?;
    put_u32(out, l)?;
    put_u32(out, sketch.num_layers())?;
    put_u32(out, d)?;
    put_u32(out, sketch.rank_table().len())?;
    out.write_all(&(cfg.memory_budget_bytes as u64).to_le_bytes())?;
    out.write_all(&cfg.seed.to_le_bytes())?;
    out.write_all(&[cfg.aggregate_mode.as_byte()])?;
    let flags = if cfg.first_arrival_optimization { FLAG_FIRST_ARRIVAL } else { 0 };
    out.write_all(&[flags])?;
    out.write_all(sketch.rank_table().raw())?;
    for p in 0..sketch.num_layers() {
        for label in 0..l {
            for row in 0..d {
                for col in 0..d {
                    let cell = sketch.cell(p, label, row, col);
                    out.write_all(&[cell.rank])?;
                    out.write_all(&cell.aggregate.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn read_sbg_body<R: Read>(input: &mut Input<R>) -> Result<SbgSketch> {
    check_version(input)?;
    let l = input.u32()?;
    let p = input.u32()?;
    let d = input.u32()?;
    let ranks = input.u32()?;
    let budget = input.u64()? as usize;
    let seed = input.u64()?;
    let mode = mode_from(input.u8()?)?;
    let flags = input.u8()?;
    if flags & !FLAG_FIRST_ARRIVAL != 0 {
        return Err(SketchError::Snapshot(format!("unknown flags {flags:#04x}")));
    }
    let config = SketchConfig {
        num_labels: l,
        num_layers: p,
        memory_budget_bytes: budget,
        num_rank_vectors: ranks,
        aggregate_mode: mode,
        first_arrival_optimization: flags & FLAG_FIRST_ARRIVAL != 0,
        seed,
        dimension: Some(d),
    };
    let mut sketch = SbgSketch::new(config).map_err(|e| SketchError::Snapshot(format!("bad header: {e}")))?;
    let width = l.saturating_sub(1);
    let table = RankTable::from_raw(l, input.vec(ranks * width)?)?;
    if table.len() != ranks {
        return Err(SketchError::Snapshot("rank table size mismatch".into()));
    }
    sketch.rank_table = table;
    for layer in 0..p {
        for label in 0..l {
            for row in 0..d {
                for col in 0..d {
                    let rank = input.u8()?;
                    let aggregate = input.f64()?;
                    sketch.set_cell(layer, label, row, col, Cell { rank, aggregate });
                }
            }
        }
    }
    Ok(sketch)
}

pub fn read_sbg<R: Read>(reader: R) -> Result<SbgSketch> {
    let mut input = Input { inner: reader };
    if input.bytes::<4>()? != SBG_MAGIC {
        return Err(SketchError::Snapshot("not an SBG snapshot".into()));
    }
    let sketch = read_sbg_body(&mut input)?;
    input.finish()?;
    Ok(sketch)
}

pub fn write_tcm<W: Write>(out: &mut W, sketch: &TcmSketch) -> Result<()> {
    let cfg = sketch.config();
    let (l, d) = (cfg.num_labels, sketch.dimension());
    out.write_all(&TCM_MAGIC)?;
    put_u32(out, VERSION as usize)?;
    put_u32(out, l)?;
    put_u32(out, sketch.num_layers())?;
    put_u32(out, d)?;
    out.write_all(&(cfg.memory_budget_bytes as u64).to_le_bytes())?;
    out.write_all(&cfg.seed.to_le_bytes())?;
    out.write_all(&[cfg.aggregate_mode.as_byte()])?;
    for layer in &sketch.layers {
        for v in &layer.cells {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_tcm_body<R: Read>(input: &mut Input<R>) -> Result<TcmSketch> {
    check_version(input)?;
    let l = input.u32()?;
    let p = input.u32()?;
    let d = input.u32()?;
    let budget = input.u64()? as usize;
    let seed = input.u64()?;
    let mode = mode_from(input.u8()?)?;
    let config = TcmConfig {
        num_labels: l,
        num_layers: p,
        memory_budget_bytes: budget,
        aggregate_mode: mode,
        seed,
        dimension: Some(d),
    };
    let mut sketch = TcmSketch::new(config).map_err(|e| SketchError::Snapshot(format!("bad header: {e}")))?;
    for layer in &mut sketch.layers {
        for v in &mut layer.cells {
            *v = input.f64()?;
        }
    }
    Ok(sketch)
}

pub fn read_tcm<R: Read>(reader: R) -> Result<TcmSketch> {
    let mut input = Input { inner: reader };
    if input.bytes::<4>()? != TCM_MAGIC {
        return Err(SketchError::Snapshot("not a TCM snapshot".into()));
    }
    let sketch = read_tcm_body(&mut input)?;
    input.finish()?;
    Ok(sketch)
}

/// Either kind of snapshot.
#[derive(Clone, Debug)]
pub enum Snapshot {
    Sbg(SbgSketch),
    Tcm(TcmSketch),
}

impl Snapshot {
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut input = Input { inner: reader };
        let snapshot = match input.bytes::<4>()? {
            SBG_MAGIC => Snapshot::Sbg(read_sbg_body(&mut input)?),
            TCM_MAGIC => Snapshot::Tcm(read_tcm_body(&mut input)?),
            other => return Err(SketchError::Snapshot(format!("unknown magic {other:?}"))),
        };
        input.finish()?;
        Ok(snapshot)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        match self {
            Snapshot::Sbg(s) => write_sbg(out, s),
            Snapshot::Tcm(s) => write_tcm(out, s),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn as_graph_sketch(&self) -> &dyn GraphSketch {
        match self {
            Snapshot::Sbg(s) => s,
            Snapshot::Tcm(s) => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::EdgeQuery;
    use crate::sketch::EdgeEvent;

    fn events() -> Vec<EdgeEvent> {
        (0..500u64).map(|i| EdgeEvent::new(i % 37, (i * 7) % 41, (i % 4) as u16, (i % 5) as f64)).collect()
    }

    #[test]
    fn sbg_round_trip() {
        let mut s = SbgSketch::new(SketchConfig::new(4, 2, 4000).seed(11)).unwrap();
        s.insert_batch(&events()).unwrap();
        let mut buf = Vec::new();
        write_sbg(&mut buf, &s).unwrap();
        let back = read_sbg(buf.as_slice()).unwrap();
        assert!(s.same_cells(&back));
        let expected = SketchConfig {
            dimension: Some(s.dimension()),
            ..s.config().clone()
        };
        assert_eq!(back.config(), &expected);
        for e in events() {
            let q = EdgeQuery::new(e.src, e.dst, e.label);
            assert_eq!(s.estimate_edge(&q).unwrap(), back.estimate_edge(&q).unwrap());
        }
    }

    #[test]
    fn tcm_round_trip() {
        let mut s = TcmSketch::new(TcmConfig::new(4, 2, 4000).seed(11).mode(AggregateMode::Weighted)).unwrap();
        s.insert_batch(&events()).unwrap();
        let mut buf = Vec::new();
        write_tcm(&mut buf, &s).unwrap();
        let back = match Snapshot::read(buf.as_slice()).unwrap() {
            Snapshot::Tcm(t) => t,
            Snapshot::Sbg(_) => panic!("wrong kind"),
        };
        for e in events() {
            let q = EdgeQuery::new(e.src, e.dst, e.label);
            assert_eq!(s.estimate_edge(&q).unwrap(), back.estimate_edge(&q).unwrap());
        }
    }

    #[test]
    fn corrupt_inputs() {
        let s = SbgSketch::new(SketchConfig::new(3, 1, 1000)).unwrap();
        let mut buf = Vec::new();
        write_sbg(&mut buf, &s).unwrap();
        assert!(read_sbg(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_sbg(extra.as_slice()).is_err());
        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(Snapshot::read(bad_magic.as_slice()).is_err());
        let mut bad_version = buf.clone();
        bad_version[4] = 9;
        assert!(read_sbg(bad_version.as_slice()).is_err());
        assert!(read_tcm(buf.as_slice()).is_err());
    }
}
