//! Multi-core image container.
//!
//! ```text
//! offset size  field
//!      0    8  magic "HAERSYS1"
//!      8    4  format version (1)
//!     12    4  core count
//!     16    8  route count
//!     24    8  reserved (0)
//!     32       per core: image length in bytes (u64), then the image
//!              then per route: src core, src neuron, dst core, dst axon (u32 each)
//! ```
//!
//! All fields little-endian. A single-core system may also be stored as a
//! bare image file; [`load_any`] accepts both.

use super::routing::Route;
use crate::compiler::{emit_image, load_image, ImageFormatError, MemoryImage, IMAGE_MAGIC};

pub const SYSTEM_MAGIC: &[u8; 8] = b"HAERSYS1";
const VERSION: u32 = 1;
const HEADER: usize = 32;

pub fn emit_system(images: &[MemoryImage], routes: &[Route]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER);
    out.extend_from_slice(SYSTEM_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(images.len() as u32).to_le_bytes());
    out.extend_from_slice(&(routes.len() as u64).to_le_bytes());
    out.extend_from_slice(&0u64.to_le_bytes());
    for img in images {
        let bytes = emit_image(img);
        out.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    for r in routes {
        for v in [r.src_core, r.src_neuron, r.dst_core, r.dst_axon] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8], ImageFormatError> {
    let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or(ImageFormatError::Truncated(bytes.len()))?;
    let s = &bytes[*pos..end];
    *pos = end;
    Ok(s)
}

fn u32_at(bytes: &[u8], pos: &mut usize) -> Result<u32, ImageFormatError> {
    Ok(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().unwrap()))
}

fn u64_at(bytes: &[u8], pos: &mut usize) -> Result<u64, ImageFormatError> {
    Ok(u64::from_le_bytes(take(bytes, pos, 8)?.try_into().unwrap()))
}

/// Parses a container. Routes are returned as stored; validate them with
/// [`RoutingTable::new`](super::RoutingTable::new).
pub fn load_system(bytes: &[u8]) -> Result<(Vec<MemoryImage>, Vec<Route>), ImageFormatError> {
    let mut pos = 0;
    if take(bytes, &mut pos, 8).map_err(|_| ImageFormatError::BadMagic)? != SYSTEM_MAGIC {
        return Err(ImageFormatError::BadMagic);
    }
    if u32_at(bytes, &mut pos)? != VERSION {
        return Err(ImageFormatError::Malformed("unsupported container version".into()));
    }
    let cores = u32_at(bytes, &mut pos)? as usize;
    let route_count = u64_at(bytes, &mut pos)? as usize;
    if u64_at(bytes, &mut pos)? != 0 {
        return Err(ImageFormatError::Malformed("reserved header field is nonzero".into()));
    }
    let mut images = Vec::with_capacity(cores.min(bytes.len()));
    for c in 0..cores {
        let len = u64_at(bytes, &mut pos)? as usize;
        let img = load_image(take(bytes, &mut pos, len)?).map_err(|e| match e {
            ImageFormatError::Malformed(m) => ImageFormatError::Malformed(format!("core {c}: {m}")),
            ImageFormatError::BadMagic => ImageFormatError::Malformed(format!("core {c}: bad image magic")),
            other => other,
        })?;
        images.push(img);
    }
    let mut routes = Vec::with_capacity(route_count.min(bytes.len() / 16));
    for _ in 0..route_count {
        routes.push(Route {
            src_core: u32_at(bytes, &mut pos)?,
            src_neuron: u32_at(bytes, &mut pos)?,
            dst_core: u32_at(bytes, &mut pos)?,
            dst_axon: u32_at(bytes, &mut pos)?,
        });
    }
    if pos != bytes.len() {
        return Err(ImageFormatError::Malformed(format!("{} trailing bytes", bytes.len() - pos)));
    }
    Ok((images, routes))
}

/// Loads either a bare single-core image or a container.
pub fn load_any(bytes: &[u8]) -> Result<(Vec<MemoryImage>, Vec<Route>), ImageFormatError> {
    if bytes.starts_with(IMAGE_MAGIC) {
        Ok((vec![load_image(bytes)?], Vec::new()))
    } else {
        load_system(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, CompileOptions, MemoryGeometry};
    use crate::network::demo_network;
    use crate::router::{build_routing, Topology};

    #[test]
    fn round_trip() {
        let net = demo_network().validate().unwrap();
        let opts = CompileOptions { cores: 2, geometry: MemoryGeometry::with_rows(512), ..Default::default() };
        let c = compile(&net, &opts).unwrap();
        let table = build_routing(&c.images, Topology::default()).unwrap();
        let bytes = emit_system(&c.images, table.routes());
        let (images, routes) = load_system(&bytes).unwrap();
        assert_eq!(images, c.images);
        assert_eq!(routes, table.routes());
        assert_eq!(load_any(&bytes).unwrap().0, c.images);
        assert_eq!(emit_system(&images, &routes), bytes);

        assert!(matches!(load_system(&bytes[..bytes.len() - 1]), Err(ImageFormatError::Truncated(_))));
        assert_eq!(load_system(b"HAERIMG1"), Err(ImageFormatError::BadMagic));
        let single = emit_image(&c.images[0]);
        assert_eq!(load_any(&single).unwrap(), (vec![c.images[0].clone()], vec![]));
    }
}
