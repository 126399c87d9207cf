#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use v2x_core::crypto::drbg_from_seed;
use v2x_core::time::{ManualClock, Time64};
use v2x_service::{build_handler, pki_init, AuthorityConfig, InitOptions, Role, RunningServer, Server, Topology};

pub const NOW: Time64 = Time64::from_secs(694_310_400);
pub const AUTHORITY_SEED: u64 = 77;

pub fn init(topology: Topology, dir: &Path) {
    pki_init(topology, dir, &InitOptions::default(), &mut drbg_from_seed(9), NOW).unwrap();
}

pub fn clock() -> Arc<ManualClock> {
    Arc::new(ManualClock::new(NOW))
}

pub fn start(config: &AuthorityConfig, clock: Arc<ManualClock>) -> RunningServer {
    let handler = build_handler(config, clock, Some(AUTHORITY_SEED)).unwrap();
    Server::bind("127.0.0.1:0", handler).unwrap().spawn().unwrap()
}

pub struct Ieee {
    pub eca: RunningServer,
    pub ra: RunningServer,
    pub aca: RunningServer,
}

pub fn start_ieee(dir: &Path, clock: Arc<ManualClock>) -> Ieee {
    let aca = start(&AuthorityConfig::new(Role::Aca, "", dir), clock.clone());
    let eca = start(&AuthorityConfig::new(Role::Eca, "", dir), clock.clone());
    let mut ra = AuthorityConfig::new(Role::Ra, "", dir);
    ra.upstream_aca = Some(aca.addr_string());
    let ra = start(&ra, clock);
    Ieee { eca, ra, aca }
}

pub struct Etsi {
    pub ea: RunningServer,
    pub aa: RunningServer,
}

pub fn start_etsi(dir: &Path, clock: Arc<ManualClock>) -> Etsi {
    let ea = start(&AuthorityConfig::new(Role::Ea, "", dir), clock.clone());
    let mut aa = AuthorityConfig::new(Role::Aa, "", dir);
    aa.upstream_ea = Some(ea.addr_string());
    let aa = start(&aa, clock);
    Etsi { ea, aa }
}
