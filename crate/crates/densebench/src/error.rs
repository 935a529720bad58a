use std::path::{Path, PathBuf};

/// Errors of the file and command layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] densebench_core::Error),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: densebench_core::Error,
    },
    #[error("frame {frame}: {source}")]
    InFrame {
        frame: String,
        source: densebench_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },
    #[error("{0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit status of a contract violation.
pub const EXIT_CONTRACT: u8 = 2;
/// Process exit status of an I/O failure.
pub const EXIT_IO: u8 = 3;

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } | Error::Decode { .. } => EXIT_IO,
            Error::Core(_) | Error::InFile { .. } | Error::InFrame { .. } | Error::Contract(_) => EXIT_CONTRACT,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn decode(path: &Path, message: impl ToString) -> Self {
        Error::Decode {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn in_frame(coord: &densebench_core::FrameCoord, source: densebench_core::Error) -> Self {
        Error::InFrame {
            frame: format!("{}/{}/{}", coord.scene_id, coord.camera, coord.time_index),
            source,
        }
    }

    pub fn in_file(path: &Path, source: densebench_core::Error) -> Self {
        Error::InFile {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub(crate) fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling so readers never see partial files.
pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
