use std::fmt;
use std::io;

/// Command failure, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit 2.
    Validation(String),
    /// Guard trip, degeneracy or any other runtime stop; exit 3.
    Runtime(String),
    /// Filesystem trouble; exit 3.
    Io(String),
}

impl Failure {
    pub fn validation(file: &str, line: usize, msg: impl fmt::Display) -> Self {
        Failure::Validation(format!("{file}:{line}: {msg}"))
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        Failure::Runtime(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Runtime(_) | Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(format!("io error: {e}"))
    }
}

pub fn io_at(path: &std::path::Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}
