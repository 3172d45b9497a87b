//! Binary PPM (P6) rasters of node sets on 2-torus grids, one pixel per box.

use chainscope::error::{Error, Result};
use chainscope::grid::BoxId;
use chainscope::transition::TransitionGraph;
use std::io::Write;
use std::path::Path;

const MEMBER: [u8; 3] = [178, 34, 34];
const BACKGROUND: [u8; 3] = [255, 255, 255];

pub fn write_node_set(graph: &TransitionGraph, members: &[bool], path: &Path) -> Result<()> {
    let grid = graph.grid();
    if grid.dimension() != 2 {
        return Err(Error::InvalidParameter(
            "rasters are only defined for 2-torus graphs".into(),
        ));
    }
    let n = grid.resolution() as usize;
    let mut pixels = vec![0u8; 3 * n * n];
    for flat in 0..graph.node_count() {
        let coords = grid.coords(BoxId(flat));
        let (i, j) = (coords[0] as usize, coords[1] as usize);
        // row 0 is the top of the image: flip the y axis
        let row = n - 1 - j;
        let offset = 3 * (row * n + i);
        let color = if members[flat as usize] {
            MEMBER
        } else {
            BACKGROUND
        };
        pixels[offset..offset + 3].copy_from_slice(&color);
    }
    let mut file = std::fs::File::create(path)?;
    write!(file, "P6\n{n} {n}\n255\n")?;
    file.write_all(&pixels)?;
    Ok(())
}
