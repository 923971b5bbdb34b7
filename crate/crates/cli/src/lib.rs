//! IO companion to `pickbatch-core`: solver backends (embedded and
//! external-process), the instance/report/route file formats, an MPS reader,
//! and the command-line interface.

pub mod cli;
pub mod formats {
    pub mod instance_io;
    pub mod mps;
    pub mod report;
    pub mod route_io;
}
pub mod solver;
