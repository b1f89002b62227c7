//! Writes a field snapshot (JSON header plus little-endian binary) and
//! reads it back.

use llg_bdf3::grid::{read_snapshot, write_snapshot};
use llg_bdf3::mms::ManufacturedSolution;
use llg_bdf3::Grid;

fn main() -> llg_bdf3::Result<()> {
    let grid = Grid::new(3, 6)?;
    let field = ManufacturedSolution::three_d().exact(&grid, 0.7)?;
    let dir = std::env::temp_dir().join("llg-bdf3-snapshot");
    std::fs::create_dir_all(&dir).map_err(|e| llg_bdf3::Error::Io { path: dir.clone(), source: e })?;
    let (json, bin) = write_snapshot(&field, 0.7, &dir, "m")?;
    println!("{}\n{}", json.display(), bin.display());
    println!("{}", std::fs::read_to_string(&json).unwrap());
    let (back, header) = read_snapshot(&json)?;
    println!("t = {}, identical: {}", header.t, back == field);
    Ok(())
}
