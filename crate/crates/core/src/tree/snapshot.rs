// SPDX-License-Identifier: Apache-2.0

//! Binary index snapshot, little-endian:
//!
//! ```text
//! "GPT1"
//! extent        4 x f64 (min x, min y, max x, max y)
//! config        seg u32, max level u8, point level u8, fit levels u8 (0xff = none)
//! state         u8 (0 basic, 1 node-optimized, 2 pruned)
//! root entry    u8 (1 when the root is the only entry point)
//! trees         u32 count, then each tree as a pre-order node stream
//! lookup table  u64 count, then entries sorted by id
//! ```
//!
//! A node is `level u8, code u64, child mask u8` followed by the IL, BL and
//! UL lists (`u32` length, `u64` ids); its present children follow in slot
//! order. The first tree is rooted at the root cell; when the root is not an
//! entry point the remaining trees are the sub-roots. A lookup entry is
//! `id u64`, WKT (`u32` length, UTF-8), cells (`u32` count, then `level u8,
//! code u64, interior u8`) and, per cell, the touching segment indices
//! (`u32` count, `u32` each).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{GpTree, IndexNode, LookupEntry, LookupTable, TreeState, NO_CHILD};
use crate::error::{Error, Result};
use crate::geometry::{parse_wkt, Envelope, ObjectId};
use crate::grid::{CellCode, DecompositionConfig, GridCell, GridExtent};

const MAGIC: &[u8; 4] = b"GPT1";

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

fn write_ids<W: Write>(w: &mut W, ids: &[ObjectId]) -> Result<()> {
    w.write_u32::<LE>(ids.len() as u32)?;
    for &id in ids {
        w.write_u64::<LE>(id)?;
    }
    Ok(())
}

fn read_ids<R: Read>(r: &mut R) -> Result<Vec<ObjectId>> {
    let n = r.read_u32::<LE>()? as usize;
    (0..n).map(|_| Ok(r.read_u64::<LE>()?)).collect()
}

impl GpTree {
    pub fn write_snapshot<W: Write>(&self, table: &LookupTable, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        let b = self.extent.bounds();
        for v in [b.min_x, b.min_y, b.max_x, b.max_y] {
            w.write_f64::<LE>(v)?;
        }
        w.write_u32::<LE>(self.config.seg)?;
        w.write_u8(self.config.max_level)?;
        w.write_u8(self.config.point_level)?;
        w.write_u8(self.config.fit_levels.unwrap_or(0xff))?;
        w.write_u8(match self.state {
            TreeState::Basic => 0,
            TreeState::NodeOptimized => 1,
            TreeState::Pruned => 2,
        })?;
        let root_entry = self.sub_roots == [0];
        w.write_u8(root_entry as u8)?;
        let mut trees = vec![0u32];
        if !root_entry {
            trees.extend(&self.sub_roots);
        }
        w.write_u32::<LE>(trees.len() as u32)?;
        for t in trees {
            self.write_tree(t, &mut w)?;
        }

        let mut ids: Vec<ObjectId> = table.iter().map(|(id, _)| id).collect();
        ids.sort_unstable();
        w.write_u64::<LE>(ids.len() as u64)?;
        for id in ids {
            let e = table.get(id).expect("listed id");
            w.write_u64::<LE>(id)?;
            let wkt = e.geometry.to_string();
            w.write_u32::<LE>(wkt.len() as u32)?;
            w.write_all(wkt.as_bytes())?;
            w.write_u32::<LE>(e.cells.len() as u32)?;
            for c in &e.cells {
                w.write_u8(c.cell.level())?;
                w.write_u64::<LE>(c.cell.bits())?;
                w.write_u8(c.interior as u8)?;
            }
            for segs in &e.cell_segments {
                w.write_u32::<LE>(segs.len() as u32)?;
                for &s in segs {
                    w.write_u32::<LE>(s)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    fn write_tree<W: Write>(&self, start: u32, w: &mut W) -> Result<()> {
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            w.write_u8(node.code.level())?;
            w.write_u64::<LE>(node.code.bits())?;
            let mut mask = 0u8;
            for (slot, _) in node.child_slots() {
                mask |= 1 << slot;
            }
            w.write_u8(mask)?;
            write_ids(w, &node.il)?;
            write_ids(w, &node.bl)?;
            write_ids(w, &node.ul)?;
            if mask != 0 {
                for slot in (0..4).rev() {
                    if node.children[slot] != NO_CHILD {
                        stack.push(node.children[slot]);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<(GpTree, LookupTable)> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a GPT1 snapshot"));
        }
        let mut v = [0f64; 4];
        for x in v.iter_mut() {
            *x = r.read_f64::<LE>()?;
        }
        let extent = GridExtent::new(Envelope::new(v[0], v[1], v[2], v[3])?)?;
        let config = DecompositionConfig {
            seg: r.read_u32::<LE>()?,
            max_level: r.read_u8()?,
            point_level: r.read_u8()?,
            fit_levels: match r.read_u8()? {
                0xff => None,
                d => Some(d),
            },
        };
        config.validate()?;
        let state = match r.read_u8()? {
            0 => TreeState::Basic,
            1 => TreeState::NodeOptimized,
            2 => TreeState::Pruned,
            s => return Err(bad(format!("unknown tree state {s}"))),
        };
        let root_entry = r.read_u8()? == 1;
        let trees = r.read_u32::<LE>()?;
        if trees == 0 {
            return Err(bad("missing root"));
        }
        let mut tree = GpTree {
            nodes: Vec::new(),
            sub_roots: Vec::new(),
            state,
            config,
            extent,
        };
        for t in 0..trees {
            let idx = tree.read_tree(&mut r)?;
            if t == 0 && idx != 0 {
                return Err(bad("root must come first"));
            }
            if t > 0 {
                tree.sub_roots.push(idx);
            }
        }
        if root_entry {
            tree.sub_roots = vec![0];
        }
        if tree.nodes[0].code != CellCode::ROOT {
            return Err(bad("first tree is not rooted at the root cell"));
        }

        let mut table = LookupTable::default();
        let n = r.read_u64::<LE>()?;
        for _ in 0..n {
            let id = r.read_u64::<LE>()?;
            let len = r.read_u32::<LE>()? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            let text = String::from_utf8(buf).map_err(|e| bad(e.to_string()))?;
            let geometry = parse_wkt(&text)?;
            let count = r.read_u32::<LE>()? as usize;
            let mut cells = Vec::with_capacity(count);
            for _ in 0..count {
                let level = r.read_u8()?;
                let bits = r.read_u64::<LE>()?;
                let interior = r.read_u8()? == 1;
                cells.push(GridCell {
                    cell: CellCode::from_bits(level, bits)?,
                    interior,
                });
            }
            let mut cell_segments = Vec::with_capacity(count);
            for _ in 0..count {
                let k = r.read_u32::<LE>()? as usize;
                cell_segments.push((0..k).map(|_| r.read_u32::<LE>()).collect::<Result<_, _>>()?);
            }
            let entry = LookupEntry::new(
                geometry,
                crate::grid::Decomposition {
                    cells,
                    cell_segments,
                },
            );
            table.insert_entry(id, entry);
        }
        Ok((tree, table))
    }

    fn read_tree<R: Read>(&mut self, r: &mut R) -> Result<u32> {
        let start = self.nodes.len() as u32;
        // (parent, slot) awaiting the next node in the stream.
        let mut pending: Vec<(u32, usize)> = Vec::new();
        let mut first = true;
        while first || !pending.is_empty() {
            let level = r.read_u8()?;
            let bits = r.read_u64::<LE>()?;
            let mask = r.read_u8()?;
            let mut node = IndexNode::new(CellCode::from_bits(level, bits)?);
            node.il = read_ids(r)?;
            node.bl = read_ids(r)?;
            node.ul = read_ids(r)?;
            let idx = self.nodes.len() as u32;
            if let Some((parent, slot)) = pending.pop() {
                let p = &self.nodes[parent as usize];
                if p.code.child(slot)? != node.code {
                    return Err(bad(format!("node {} is not child {slot} of {}", node.code, p.code)));
                }
                self.nodes[parent as usize].children[slot] = idx;
            }
            self.nodes.push(node);
            for slot in (0..4).rev() {
                if mask & (1 << slot) != 0 {
                    pending.push((idx, slot));
                }
            }
            first = false;
        }
        Ok(start)
    }

    pub fn save(&self, table: &LookupTable, path: impl AsRef<Path>) -> Result<()> {
        self.write_snapshot(table, BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(GpTree, LookupTable)> {
        Self::read_snapshot(BufReader::new(File::open(path)?))
    }
}
