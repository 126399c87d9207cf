use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use v2x_core::ccms::ItsStation;
use v2x_core::cert::ValidityPolicy;
use v2x_core::crypto::{drbg_from_entropy, generate_keypair};
use v2x_core::golden;
use v2x_core::pki::{default_permissions, DEFAULT_CHAIN_DEPTH};
use v2x_core::scms::EndEntity;
use v2x_core::time::{Clock, SystemClock};
use v2x_service::{build_handler, pki_init, remote, AuthorityConfig, InitError, InitOptions, KeyStore, Role, Server, Topology};

#[derive(Parser)]
#[command(name = "v2x-pki", version, about = "SCMS and CCMS certificate authorities over TCP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hierarchy and write its keys and certificates.
    Init {
        #[arg(long)]
        topology: Topology,
        #[arg(long, env = "V2X_KEYS_DIR", default_value = "keys")]
        keys_dir: PathBuf,
        /// Authority certificates from the ECA up to the RCA (ieee only).
        #[arg(long, default_value_t = DEFAULT_CHAIN_DEPTH)]
        chain_depth: usize,
        /// Overwrite existing files.
        #[arg(long)]
        force: bool,
    },
    /// Run one authority until interrupted.
    Serve {
        #[arg(long)]
        role: Role,
        #[arg(long)]
        listen: String,
        #[arg(long, env = "V2X_KEYS_DIR", default_value = "keys")]
        keys_dir: PathBuf,
        /// Generate the role's hierarchy first if its key files are missing.
        #[arg(long)]
        init: bool,
        /// With --init, regenerate even if key files exist.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = DEFAULT_CHAIN_DEPTH)]
        chain_depth: usize,
        #[arg(long)]
        upstream_ea: Option<String>,
        #[arg(long)]
        upstream_aca: Option<String>,
        #[arg(long, default_value_t = 0)]
        download_delay_ms: u64,
    },
    /// Run a client flow against running authorities.
    Enroll {
        #[arg(long)]
        topology: Topology,
        #[arg(long, env = "V2X_KEYS_DIR", default_value = "keys")]
        keys_dir: PathBuf,
        #[arg(long, required_if_eq("topology", "ieee"))]
        eca: Option<String>,
        #[arg(long, required_if_eq("topology", "ieee"))]
        ra: Option<String>,
        #[arg(long, required_if_eq("topology", "etsi"))]
        ea: Option<String>,
        #[arg(long, required_if_eq("topology", "etsi"))]
        aa: Option<String>,
        #[arg(long, default_value_t = 5)]
        cert_count: u8,
        #[arg(long, default_value = "its-station-0001")]
        its_id: String,
    },
    /// Check or rewrite the codec golden vectors.
    Golden {
        #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/testdata/golden"))]
        dir: PathBuf,
        /// Rewrite the files instead of comparing against them.
        #[arg(long)]
        regenerate: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("v2x-pki: {e}");
            ExitCode::FAILURE
        }
    }
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn init(topology: Topology, keys_dir: &Path, chain_depth: usize, force: bool) -> std::result::Result<(), InitError> {
    let options = InitOptions { chain_depth, force, ..InitOptions::default() };
    let written = pki_init(topology, keys_dir, &options, &mut drbg_from_entropy(), SystemClock.now())?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Init { topology, keys_dir, chain_depth, force } => Ok(init(topology, &keys_dir, chain_depth, force)?),
        Command::Serve {
            role,
            listen,
            keys_dir,
            init: do_init,
            force,
            chain_depth,
            upstream_ea,
            upstream_aca,
            download_delay_ms,
        } => {
            let mut config = AuthorityConfig::new(role, listen, keys_dir);
            config.upstream_ea = upstream_ea;
            config.upstream_aca = upstream_aca;
            config.download_delay_ms = download_delay_ms;
            config.validate()?;
            if do_init && (force || !KeyStore::new(&config.keys_dir).key_path(role.name()).exists()) {
                init(role.topology(), &config.keys_dir, chain_depth, true)?;
            }
            let handler = build_handler(&config, Arc::new(SystemClock), None)?;
            let server = Server::bind(&config.listen, handler)?;
            let shutdown = server.shutdown_handle();
            ctrlc::set_handler(move || shutdown.shutdown())?;
            eprintln!("{role} listening on {}", server.local_addr()?);
            server.run()?;
            eprintln!("{role} stopped");
            Ok(())
        }
        Command::Enroll { topology, keys_dir, eca, ra, ea, aa, cert_count, its_id } => {
            let store = KeyStore::new(keys_dir);
            let policy = ValidityPolicy::default();
            let clock = Arc::new(SystemClock);
            match topology {
                Topology::Ieee => {
                    let config = remote::ee_config(&store, default_permissions(), &policy)?;
                    let mut ee = EndEntity::new(config, clock.clone(), drbg_from_entropy());
                    let (eca, ra) = (eca.unwrap_or_default(), ra.unwrap_or_default());
                    let outcome = remote::run_ieee(&mut ee, &eca, &ra, cert_count, clock.as_ref())?;
                    let ec = ee.enrollment_certificate().expect("enrolled");
                    println!("enrollment certificate {}", ec.hashed_id8());
                    for (i, entry) in outcome.entries.iter().enumerate() {
                        match entry {
                            Ok(c) => println!("authorization certificate {} (index {})", c.certificate.hashed_id8(), c.index),
                            Err(e) => println!("entry {i} failed: {e}"),
                        }
                    }
                    if let Some(s) = ee.schedule() {
                        println!("currentI {} next download {:?}", s.current_i, s.next_di_time);
                    }
                }
                Topology::Etsi => {
                    let config = remote::its_config(&store, its_id.as_bytes(), default_permissions(), &policy)?;
                    let (canonical, _) = generate_keypair(&mut drbg_from_entropy())?;
                    let mut its = ItsStation::new(config, canonical, clock, drbg_from_entropy());
                    let (ea, aa) = (ea.unwrap_or_default(), aa.unwrap_or_default());
                    let (ec, at) = remote::run_etsi(&mut its, &ea, &aa)?;
                    println!("enrolment credential {}", ec.hashed_id8());
                    println!("authorization ticket {}", at.hashed_id8());
                }
            }
            Ok(())
        }
        Command::Golden { dir, regenerate } => {
            let vectors = golden::generate()?;
            if regenerate {
                if dir.exists() {
                    for entry in fs::read_dir(&dir)? {
                        let path = entry?.path();
                        if path.extension().is_some_and(|e| e == "hex") {
                            fs::remove_file(path)?;
                        }
                    }
                }
                golden::write_dir(&dir, &vectors)?;
                println!("wrote {} vectors to {}", vectors.len(), dir.display());
                return Ok(());
            }
            let mut stale = 0;
            for v in &vectors {
                let path = dir.join(format!("{}.hex", v.name));
                let current = fs::read_to_string(&path).unwrap_or_default();
                if current != golden::to_hex_dump(&v.bytes) {
                    println!("stale: {}", path.display());
                    stale += 1;
                }
            }
            if stale > 0 {
                return Err(format!("{stale} golden vectors differ; rerun with --regenerate after a deliberate format change").into());
            }
            println!("{} golden vectors up to date", vectors.len());
            Ok(())
        }
    }
}
