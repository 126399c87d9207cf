//! Thread-per-connection frame server.
//!
//! Requests on one connection are answered in order. On shutdown the server
//! stops accepting, lets every connection finish the request it is handling,
//! and joins the connection threads.

use std::io::{self, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::frame::{read_frame, write_frame, Frame};
use crate::handlers::Handler;

const POLL_INTERVAL: Duration = Duration::from_millis(50);
/// How long a peer may take to deliver the rest of a frame it has started.
const FRAME_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Default)]
pub struct ShutdownHandle(Arc<AtomicBool>);

impl ShutdownHandle {
    pub fn shutdown(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_shutdown(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

pub struct Server {
    listener: TcpListener,
    handler: Arc<dyn Handler>,
    shutdown: ShutdownHandle,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, handler: Arc<dyn Handler>) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        Ok(Server { listener, handler, shutdown: ShutdownHandle::default() })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn shutdown_handle(&self) -> ShutdownHandle {
        self.shutdown.clone()
    }

    /// Serves until the shutdown handle fires.
    pub fn run(self) -> io::Result<()> {
        let mut connections: Vec<JoinHandle<()>> = Vec::new();
        while !self.shutdown.is_shutdown() {
            match self.listener.accept() {
                Ok((stream, _)) => {
                    let handler = Arc::clone(&self.handler);
                    let shutdown = self.shutdown.clone();
                    connections.push(thread::spawn(move || {
                        let _ = serve_connection(stream, handler.as_ref(), &shutdown);
                    }));
                    connections.retain(|c| !c.is_finished());
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL_INTERVAL),
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e),
            }
        }
        for c in connections {
            let _ = c.join();
        }
        Ok(())
    }

    /// Runs the server on a background thread.
    pub fn spawn(self) -> io::Result<RunningServer> {
        let addr = self.local_addr()?;
        let shutdown = self.shutdown_handle();
        let thread = thread::spawn(move || self.run());
        Ok(RunningServer { addr, shutdown, thread: Some(thread) })
    }
}

pub struct RunningServer {
    pub addr: SocketAddr,
    shutdown: ShutdownHandle,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl RunningServer {
    pub fn addr_string(&self) -> String {
        self.addr.to_string()
    }

    pub fn stop(mut self) -> io::Result<()> {
        self.stop_inner()
    }

    fn stop_inner(&mut self) -> io::Result<()> {
        self.shutdown.shutdown();
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        let _ = self.stop_inner();
    }
}

/// Blocks until a byte is available. `false` on end of stream, error, or shutdown.
fn wait_readable(stream: &TcpStream, shutdown: &ShutdownHandle) -> io::Result<bool> {
    stream.set_read_timeout(Some(POLL_INTERVAL))?;
    let mut probe = [0u8; 1];
    loop {
        match stream.peek(&mut probe) {
            Ok(0) => return Ok(false),
            Ok(_) => return Ok(true),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => {
                if shutdown.is_shutdown() {
                    return Ok(false);
                }
            }
            Err(e) => return Err(e),
        }
    }
}

fn serve_connection(stream: TcpStream, handler: &dyn Handler, shutdown: &ShutdownHandle) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_write_timeout(Some(FRAME_TIMEOUT))?;
    while wait_readable(&stream, shutdown)? {
        stream.set_read_timeout(Some(FRAME_TIMEOUT))?;
        let response = match read_frame(&mut &stream) {
            Ok(Some(request)) => handler.handle(&request),
            Ok(None) => return Ok(()),
            Err(e) if e.is_recoverable() => Frame::error(e),
            Err(_) => return Ok(()),
        };
        write_frame(&mut &stream, &response)?;
    }
    Ok(())
}
