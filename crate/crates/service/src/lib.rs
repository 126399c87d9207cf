//! Runs the provisioning authorities as TCP services.

pub mod client;
pub mod config;
pub mod frame;
pub mod handlers;
pub mod init;
pub mod keystore;
pub mod remote;
pub mod server;

pub use client::{Client, ClientError, TcpAcaLink, TcpEaLink};
pub use config::{AuthorityConfig, ConfigError, Role};
pub use frame::{kind, Frame, FrameError, MAX_FRAME_LEN};
pub use handlers::{build_handler, BuildError, Handler, ItsRegistration};
pub use init::{pki_init, InitError, InitOptions, Topology};
pub use keystore::{KeyStore, KeystoreError};
pub use server::{RunningServer, Server, ShutdownHandle};
