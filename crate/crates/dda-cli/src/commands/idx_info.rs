//! `dda idx-info`: inspect an IDX file's header.

use std::path::Path;

use crate::failure::{Context, Failure, Result};
use crate::idx::{self, IMAGES_MAGIC};

use super::sha256_hex;

pub fn cmd_idx_info(path: &Path) -> Result<()> {
    let bytes = std::fs::read(path).ctx(path.display())?;
    let header = idx::peek_header(&bytes)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    println!("file:   {}", path.display());
    println!("magic:  0x{:08x}", header.magic);
    if header.magic == IMAGES_MAGIC {
        println!("kind:   images");
        println!("count:  {}", header.count);
        println!("rows:   {}", header.rows);
        println!("cols:   {}", header.cols);
        // Validate the payload, not just the header.
        idx::parse_images(&bytes).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    } else {
        println!("kind:   labels");
        println!("count:  {}", header.count);
        idx::parse_labels(&bytes).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    }
    println!("sha256: {}", sha256_hex(&bytes));
    Ok(())
}
