use std::path::{Path, PathBuf};

use rapidplace::design::{builtin_conv_unit, DesignSpec, UnitSpec};
use rapidplace::device::{bundled_device, Device};
use rapidplace::error::{Error, Result};
use sha2::{Digest, Sha256};

use crate::manifest::InputHash;

pub const BUILTIN_CONV: &str = "builtin:conv";

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// A device file, or the name of a bundled descriptor (`tiny4`,
/// `vu11p-like.json`, ...) when no such file exists.
pub fn load_device(arg: &str, role: &str) -> Result<(Device, InputHash)> {
    let path = PathBuf::from(arg);
    let (device, text) = if path.exists() {
        let text = read(&path)?;
        (Device::from_json_str(&text, arg)?, text)
    } else {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        let device = bundled_device(name).map_err(|_| Error::Io {
            path: path.clone(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no such file or bundled device",
            ),
        })?;
        let text = device.to_json();
        (device, text)
    };
    Ok((device, InputHash::new(role, arg, &text)))
}

/// `builtin:conv` or a JSON file holding a single-unit design.
pub fn load_unit(arg: &str, role: &str) -> Result<(UnitSpec, InputHash)> {
    if arg == BUILTIN_CONV {
        let unit = builtin_conv_unit();
        let text = unit.design().to_json();
        return Ok((unit, InputHash::new(role, arg, &text)));
    }
    let text = read(Path::new(arg))?;
    let design = DesignSpec::from_json_str(&text, arg)?;
    let unit = UnitSpec::try_from(design)?;
    Ok((unit, InputHash::new(role, arg, &text)))
}

pub fn load_text(path: &Path, role: &str) -> Result<(String, InputHash)> {
    let text = read(path)?;
    let hash = InputHash::new(role, &path.display().to_string(), &text);
    Ok((text, hash))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.display().to_string(),
        msg: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
