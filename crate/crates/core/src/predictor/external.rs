use std::io::{self, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{self, ERROR_MAGIC, RESPONSE_MAGIC};
use super::PredictError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Host side of a predictor connection. One request at a time.
///
/// Reads happen on a helper thread so every wait honors the timeout. Any
/// framing error closes the connection; later calls fail with `Closed`.
pub struct ExternalPredictor {
    writer: Option<Box<dyn Write + Send>>,
    incoming: Receiver<io::Result<Vec<u8>>>,
    buffer: Vec<u8>,
    eof: bool,
    child: Option<Child>,
    timeout: Duration,
}

fn pump<R: Read>(mut reader: R, tx: mpsc::Sender<io::Result<Vec<u8>>>) {
    let mut buf = [0u8; 8192];
    loop {
        match reader.read(&mut buf) {
            Ok(0) => {
                let _ = tx.send(Ok(Vec::new()));
                return;
            }
            Ok(n) => {
                if tx.send(Ok(buf[..n].to_vec())).is_err() {
                    return;
                }
            }
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => {
                let _ = tx.send(Err(e));
                return;
            }
        }
    }
}

impl ExternalPredictor {
    /// Launches `command[0]` with the remaining arguments and performs the
    /// handshake.
    pub fn spawn(command: &[String], timeout: Duration) -> Result<ExternalPredictor, PredictError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| PredictError::PredictorCrashed("empty predictor command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| PredictError::PredictorCrashed(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut p = ExternalPredictor::unconnected(stdout, stdin, timeout);
        p.child = Some(child);
        p.handshake()?;
        Ok(p)
    }

    /// Connects over arbitrary streams (pipes, sockets, in-memory buffers).
    pub fn from_streams<R, W>(
        reader: R,
        writer: W,
        timeout: Duration,
    ) -> Result<ExternalPredictor, PredictError>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let mut p = ExternalPredictor::unconnected(reader, writer, timeout);
        p.handshake()?;
        Ok(p)
    }

    fn unconnected<R, W>(reader: R, writer: W, timeout: Duration) -> ExternalPredictor
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::Builder::new()
            .name("predictor-reader".into())
            .spawn(move || pump(reader, tx))
            .expect("spawn reader thread");
        ExternalPredictor {
            writer: Some(Box::new(writer)),
            incoming: rx,
            buffer: Vec::new(),
            eof: false,
            child: None,
            timeout,
        }
    }

    pub fn is_open(&self) -> bool {
        self.writer.is_some()
    }

    fn close(&mut self) {
        self.writer = None;
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }

    fn fail<T>(&mut self, err: PredictError) -> Result<T, PredictError> {
        self.close();
        Err(err)
    }

    fn crashed(&mut self, what: &str) -> PredictError {
        let status = self
            .child
            .as_mut()
            .and_then(|c| c.try_wait().ok().flatten())
            .map(|s| format!(" ({s})"))
            .unwrap_or_default();
        PredictError::PredictorCrashed(format!("{what}{status}"))
    }

    fn send(&mut self, bytes: &[u8]) -> Result<(), PredictError> {
        let Some(w) = self.writer.as_mut() else {
            return Err(PredictError::Closed);
        };
        if let Err(e) = w.write_all(bytes).and_then(|_| w.flush()) {
            let err = self.crashed(&format!("write failed: {e}"));
            return self.fail(err);
        }
        Ok(())
    }

    fn read_exact(&mut self, n: usize, deadline: Instant) -> Result<Vec<u8>, PredictError> {
        while self.buffer.len() < n {
            if self.eof {
                let err = self.crashed("stream closed mid-frame");
                return self.fail(err);
            }
            let left = deadline.saturating_duration_since(Instant::now());
            match self.incoming.recv_timeout(left) {
                Ok(Ok(chunk)) if chunk.is_empty() => self.eof = true,
                Ok(Ok(chunk)) => self.buffer.extend_from_slice(&chunk),
                Ok(Err(e)) => {
                    let err = self.crashed(&format!("read failed: {e}"));
                    return self.fail(err);
                }
                Err(RecvTimeoutError::Timeout) => return self.fail(PredictError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    let err = self.crashed("reader stopped");
                    return self.fail(err);
                }
            }
        }
        Ok(self.buffer.drain(..n).collect())
    }

    fn handshake(&mut self) -> Result<(), PredictError> {
        self.send(protocol::HANDSHAKE)?;
        let deadline = Instant::now() + self.timeout;
        let reply = self.read_exact(5, deadline)?;
        if reply[..] != protocol::handshake_reply()[..] {
            return self.fail(PredictError::Protocol(format!(
                "bad handshake reply {reply:02x?}"
            )));
        }
        Ok(())
    }

    /// Requests exactly `length` bytes continuing `prefix`.
    pub fn predict(&mut self, prefix: &[u8], length: usize) -> Result<Vec<u8>, PredictError> {
        if !self.is_open() {
            return Err(PredictError::Closed);
        }
        if length == 0 {
            return Err(PredictError::ZeroLength);
        }
        let requested = match u32::try_from(length) {
            Ok(n) if u32::try_from(prefix.len()).is_ok() => n,
            _ => return Err(PredictError::Protocol("frame length exceeds u32".into())),
        };
        self.send(&protocol::encode_request(prefix, requested))?;

        let deadline = Instant::now() + self.timeout;
        let head = self.read_exact(6, deadline)?;
        let declared = u32::from_le_bytes(head[2..6].try_into().unwrap()) as usize;
        if &head[..2] == ERROR_MAGIC {
            let msg = self
                .read_exact(declared.min(4096), deadline)
                .map(|m| String::from_utf8_lossy(&m).into_owned())
                .unwrap_or_default();
            return self.fail(PredictError::Protocol(format!("predictor reported error: {msg}")));
        }
        if &head[..2] != RESPONSE_MAGIC {
            return self.fail(PredictError::Protocol(format!(
                "bad response magic {:02x?}",
                &head[..2]
            )));
        }
        if declared > length {
            return self.fail(PredictError::Protocol(format!(
                "response declares {declared} bytes, {length} requested"
            )));
        }
        let payload = self.read_exact(declared, deadline)?;
        if declared < length {
            return Err(PredictError::ShortResponse {
                expected: length,
                got: declared,
            });
        }
        Ok(payload)
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        self.close();
    }
}
