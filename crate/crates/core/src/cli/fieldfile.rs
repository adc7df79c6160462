//! `CANONFORM1` field files: a line-oriented text header followed by complex
//! values as little-endian `f64` pairs, point-major and component-minor.
//!
//! ```text
//! CANONFORM1
//! representation real
//! axes 2
//! axis spatial 8 1
//! axis time 16 0.5
//! omega0 none
//! components 1
//! label P
//! values 128
//! end
//! <128 × 16 bytes>
//! ```

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{ComponentField, Representation};
use crate::grid::{Axis, AxisRole, SpacetimeGrid};
use crate::C64;

pub const MAGIC: &str = "CANONFORM1";

fn bad(msg: impl Into<String>) -> Error {
    Error::FieldFile(msg.into())
}

fn role_name(r: AxisRole) -> &'static str {
    r.as_str()
}

fn parse_role(s: &str) -> Result<AxisRole> {
    match s {
        "spatial" => Ok(AxisRole::Spatial),
        "momentum" => Ok(AxisRole::Momentum),
        "time" => Ok(AxisRole::Time),
        _ => Err(bad(format!("unknown axis role `{s}`"))),
    }
}

fn header(f: &ComponentField) -> Result<String> {
    let grid = f.grid();
    let mut h = format!("{MAGIC}\nrepresentation {}\naxes {}\n", f.representation().as_str(), grid.axes().len());
    for a in grid.axes() {
        h.push_str(&format!("axis {} {} {}\n", role_name(a.role), a.len, a.spacing));
    }
    match grid.fixed_omega() {
        Some(w) => h.push_str(&format!("omega0 {w}\n")),
        None => h.push_str("omega0 none\n"),
    }
    h.push_str(&format!("components {}\n", f.ncomp()));
    for l in f.labels() {
        if l.is_empty() || l.chars().any(char::is_whitespace) {
            return Err(bad(format!("label `{l}` must be nonempty without whitespace")));
        }
        h.push_str(&format!("label {l}\n"));
    }
    h.push_str(&format!("values {}\nend\n", f.values().len()));
    Ok(h)
}

/// Serialize to bytes.
pub fn encode_field(f: &ComponentField) -> Result<Vec<u8>> {
    let mut out = header(f)?.into_bytes();
    out.reserve(16 * f.values().len());
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

/// Write `bytes` to a sibling temporary file and rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let name = path.file_name().ok_or_else(|| bad(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_field(path: &Path, f: &ComponentField) -> Result<()> {
    write_atomic(path, &encode_field(f)?)
}

struct Lines<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("header ends before `end`"))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not UTF-8"))
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| bad(format!("expected `{key} …`, found `{line}`")))
    }
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| bad(format!("cannot parse {what} from `{s}`")))
}

/// Parse bytes produced by [`encode_field`].
pub fn decode_field(bytes: &[u8]) -> Result<ComponentField> {
    if !bytes.starts_with(MAGIC.as_bytes()) || bytes.get(MAGIC.len()) != Some(&b'\n') {
        return Err(bad(format!("missing `{MAGIC}` magic")));
    }
    let mut lines = Lines { bytes, pos: MAGIC.len() + 1 };
    let repr = match lines.keyed("representation")? {
        "real" => Representation::Real,
        "dual" => Representation::Dual,
        other => return Err(bad(format!("unknown representation `{other}`"))),
    };
    let naxes: usize = num(lines.keyed("axes")?, "axis count")?;
    let mut axes = Vec::with_capacity(naxes);
    for _ in 0..naxes {
        let parts: Vec<&str> = lines.keyed("axis")?.split(' ').collect();
        let [role, len, spacing] = parts[..] else {
            return Err(bad("axis line needs role, length and spacing"));
        };
        axes.push(Axis::new(num(len, "axis length")?, num(spacing, "axis spacing")?, parse_role(role)?));
    }
    let omega0 = match lines.keyed("omega0")? {
        "none" => None,
        w => Some(num::<f64>(w, "omega0")?),
    };
    let ncomp: usize = num(lines.keyed("components")?, "component count")?;
    let labels: Vec<String> = (0..ncomp).map(|_| lines.keyed("label").map(String::from)).collect::<Result<_>>()?;
    let count: usize = num(lines.keyed("values")?, "value count")?;
    if lines.next()? != "end" {
        return Err(bad("header is not terminated by `end`"));
    }
    let grid = match omega0 {
        Some(w) => SpacetimeGrid::time_harmonic(axes, w),
        None => SpacetimeGrid::new(axes),
    }
    .map_err(|e| bad(format!("header grid: {e}")))?;
    let expected = grid.npts() * ncomp;
    if count != expected {
        return Err(bad(format!("header declares {count} values but the grid and components need {expected}")));
    }
    let data = &bytes[lines.pos..];
    if data.len() != 16 * count {
        return Err(bad(format!(
            "expected {count} values ({} bytes), found {} bytes",
            16 * count,
            data.len()
        )));
    }
    let values: Vec<C64> = data
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    let field = ComponentField::new(Arc::new(grid), labels, values, repr)?;
    if header(&field)?.as_bytes() != &bytes[..lines.pos] {
        return Err(bad("header is not in canonical form"));
    }
    Ok(field)
}

pub fn read_field(path: &Path) -> Result<ComponentField> {
    let bytes = std::fs::read(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    decode_field(&bytes).map_err(|e| match e {
        Error::FieldFile(m) => bad(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Read a field and check it against the grid and labels a model expects.
pub fn read_field_for(path: &Path, grid: &SpacetimeGrid, labels: &[String]) -> Result<ComponentField> {
    let f = read_field(path)?;
    if **f.grid() != *grid {
        return Err(bad(format!("{}: grid differs from the configured grid", path.display())));
    }
    if f.labels() != labels {
        return Err(bad(format!("{}: labels {:?} differ from expected {labels:?}", path.display(), f.labels())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_bandlimited_field;

    fn sample() -> ComponentField {
        let grid = Arc::new(SpacetimeGrid::new(vec![Axis::spatial(4, 0.3), Axis::time(6, 0.5)]).unwrap());
        random_bandlimited_field(&grid, 2, 1, 11).unwrap().with_labels(vec!["a".into(), "b[0]".into()]).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let f = sample().to_dual();
        let bytes = encode_field(&f).unwrap();
        let g = decode_field(&bytes).unwrap();
        assert_eq!(g.labels(), f.labels());
        assert_eq!(g.representation(), f.representation());
        assert!(f.values().iter().zip(g.values()).all(|(a, b)| a.re.to_bits() == b.re.to_bits()
            && a.im.to_bits() == b.im.to_bits()));
        assert_eq!(encode_field(&g).unwrap(), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = encode_field(&sample()).unwrap();
        let text = String::from_utf8_lossy(&bytes[..120]);
        assert!(text.starts_with("CANONFORM1\nrepresentation real\naxes 2\naxis spatial 4 0.3\naxis time 6 0.5\n"));
    }

    #[test]
    fn truncation_names_both_counts() {
        let bytes = encode_field(&sample()).unwrap();
        let err = decode_field(&bytes[..bytes.len() - 5]).unwrap_err().to_string();
        assert!(err.contains("expected 48 values (768 bytes)") && err.contains("763 bytes"), "{err}");
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let mut bytes = encode_field(&sample()).unwrap();
        bytes[9] = b'2';
        assert!(decode_field(&bytes).unwrap_err().to_string().contains("magic"));
    }

    #[test]
    fn non_canonical_header_is_rejected() {
        let bytes = encode_field(&sample()).unwrap();
        let text = String::from_utf8(bytes[..60].to_vec()).unwrap().replace("0.3", "0.30");
        let mut edited = text.into_bytes();
        edited.extend_from_slice(&bytes[60..]);
        assert!(decode_field(&edited).is_err());
    }

    #[test]
    fn atomic_write_and_label_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("f.cf");
        let f = sample();
        write_field(&path, &f).unwrap();
        assert!(read_field_for(&path, f.grid(), f.labels()).is_ok());
        assert!(read_field_for(&path, f.grid(), &["x".into(), "y".into()]).is_err());
        let leftovers: Vec<_> = std::fs::read_dir(path.parent().unwrap()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
