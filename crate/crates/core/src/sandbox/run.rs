use std::fs;
use std::io::{self, Read, Write};
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{ExecutionReport, ResourceLimits, RunStatus, SandboxError};

const STDERR_CAP: usize = 64 * 1024;
const READER_JOIN_TIMEOUT: Duration = Duration::from_secs(2);

/// How to launch a candidate: an argv template in which `{file}` is replaced
/// with the path of the program written to a fresh scratch directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Runner {
    pub argv: Vec<String>,
    /// Name given to the program file inside the scratch directory.
    pub file_name: String,
    pub keep_scratch: bool,
}

impl Default for Runner {
    fn default() -> Self {
        Self {
            argv: vec!["python3".into(), "{file}".into()],
            file_name: "main.py".into(),
            keep_scratch: false,
        }
    }
}

impl Runner {
    /// Parse a shell-style command line such as `"python3 -I {file}"`.
    /// If `{file}` is absent, the file path is appended.
    pub fn parse(command: &str) -> Result<Self, SandboxError> {
        let mut argv =
            shlex::split(command).ok_or_else(|| SandboxError::InvalidRunner(command.into()))?;
        if argv.is_empty() {
            return Err(SandboxError::InvalidRunner(command.into()));
        }
        if !argv.iter().any(|a| a.contains("{file}")) {
            argv.push("{file}".into());
        }
        Ok(Self {
            argv,
            ..Self::default()
        })
    }

    pub fn keep_scratch(mut self, keep: bool) -> Self {
        self.keep_scratch = keep;
        self
    }
}

struct Capture {
    bytes: Vec<u8>,
    overflowed: bool,
}

fn spawn_reader<R: Read + Send + 'static>(
    mut pipe: R,
    cap: usize,
    overflow: Option<Arc<AtomicBool>>,
) -> mpsc::Receiver<Capture> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut bytes = Vec::new();
        let mut overflowed = false;
        let mut buf = [0u8; 8192];
        loop {
            match pipe.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(bytes.len());
                    bytes.extend_from_slice(&buf[..n.min(room)]);
                    if n > room && !overflowed {
                        overflowed = true;
                        if let Some(flag) = &overflow {
                            flag.store(true, Ordering::SeqCst);
                        }
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(_) => break,
            }
        }
        let _ = tx.send(Capture { bytes, overflowed });
    });
    rx
}

fn set_rlimit(resource: libc::__rlimit_resource_t, value: u64) {
    let lim = libc::rlimit {
        rlim_cur: value as libc::rlim_t,
        rlim_max: value as libc::rlim_t,
    };
    // SAFETY: plain syscall on a stack value; async-signal-safe.
    unsafe {
        libc::setrlimit(resource, &lim);
    }
}

fn kill_group(pgid: libc::pid_t) {
    // SAFETY: signalling our own child's process group.
    unsafe {
        libc::killpg(pgid, libc::SIGKILL);
    }
}

/// Reap `pid`, optionally without blocking. Returns the raw wait status and
/// rusage once the child has exited.
fn reap(pid: libc::pid_t, block: bool) -> io::Result<Option<(libc::c_int, libc::rusage)>> {
    let mut status: libc::c_int = 0;
    // SAFETY: rusage is plain old data; zeroed is a valid value.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let flags = if block { 0 } else { libc::WNOHANG };
    loop {
        // SAFETY: pid is our direct child; pointers are to live stack values.
        let ret = unsafe { libc::wait4(pid, &mut status, flags, &mut usage) };
        if ret == pid {
            return Ok(Some((status, usage)));
        }
        if ret == 0 {
            return Ok(None);
        }
        let err = io::Error::last_os_error();
        if err.kind() != io::ErrorKind::Interrupted {
            return Err(err);
        }
    }
}

fn mentions_oom(stderr: &str) -> bool {
    let lower = stderr.to_ascii_lowercase();
    stderr.contains("MemoryError") || lower.contains("bad_alloc") || lower.contains("out of memory")
}

/// Run `program` once with `stdin` piped in, under `limits`.
pub fn run_once(
    runner: &Runner,
    program: &str,
    stdin: &str,
    limits: &ResourceLimits,
) -> Result<ExecutionReport, SandboxError> {
    limits.validate()?;
    let scratch = tempfile::Builder::new().prefix("mot-run-").tempdir()?;
    let file: PathBuf = scratch.path().join(&runner.file_name);
    fs::write(&file, program)?;

    let file_str = file.to_string_lossy();
    let argv: Vec<String> = runner
        .argv
        .iter()
        .map(|a| a.replace("{file}", &file_str))
        .collect();

    let mem = limits.memory_bytes;
    let cpu_secs = limits.wall_time.as_secs() + 2;
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .current_dir(scratch.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // SAFETY: only async-signal-safe libc calls run between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            libc::setpgid(0, 0);
            set_rlimit(libc::RLIMIT_AS, mem);
            set_rlimit(libc::RLIMIT_CORE, 0);
            set_rlimit(libc::RLIMIT_CPU, cpu_secs);
            Ok(())
        });
    }

    let started = Instant::now();
    let mut child = cmd.spawn().map_err(|source| match source.kind() {
        io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => {
            SandboxError::InterpreterMissing {
                program: argv[0].clone(),
                source,
            }
        }
        _ => SandboxError::Io(source),
    })?;
    let pid = child.id() as libc::pid_t;

    let overflow = Arc::new(AtomicBool::new(false));
    let stdout_rx = spawn_reader(
        child.stdout.take().expect("stdout piped"),
        limits.output_cap_bytes as usize,
        Some(overflow.clone()),
    );
    let stderr_rx = spawn_reader(child.stderr.take().expect("stderr piped"), STDERR_CAP, None);
    let mut stdin_pipe = child.stdin.take().expect("stdin piped");
    let input = stdin.as_bytes().to_vec();
    thread::spawn(move || {
        // A child that exits early closes the pipe; that is not our error.
        let _ = stdin_pipe.write_all(&input);
    });

    let mut timed_out = false;
    let mut killed_for_output = false;
    let mut poll = Duration::from_micros(500);
    let (status, usage) = loop {
        if let Some(done) = reap(pid, false)? {
            break done;
        }
        if started.elapsed() >= limits.wall_time {
            timed_out = true;
            kill_group(pid);
            break reap(pid, true)?.expect("blocking wait returns");
        }
        if overflow.load(Ordering::SeqCst) {
            killed_for_output = true;
            kill_group(pid);
            break reap(pid, true)?.expect("blocking wait returns");
        }
        thread::sleep(poll);
        poll = (poll * 2).min(Duration::from_millis(5));
    };
    let wall = started.elapsed();
    // Take down anything the candidate left behind in its group.
    kill_group(pid);

    let out = stdout_rx
        .recv_timeout(READER_JOIN_TIMEOUT)
        .unwrap_or(Capture {
            bytes: Vec::new(),
            overflowed: false,
        });
    let err = stderr_rx
        .recv_timeout(READER_JOIN_TIMEOUT)
        .unwrap_or(Capture {
            bytes: Vec::new(),
            overflowed: false,
        });
    let stdout = String::from_utf8_lossy(&out.bytes).into_owned();
    let stderr =
        String::from_utf8_lossy(&err.bytes).replace(&format!("{}/", scratch.path().display()), "");
    let peak_memory = (usage.ru_maxrss.max(0) as u64) * 1024;

    let (exit_code, signal) = if libc::WIFEXITED(status) {
        (libc::WEXITSTATUS(status), None)
    } else if libc::WIFSIGNALED(status) {
        let sig = libc::WTERMSIG(status);
        (-sig, Some(sig))
    } else {
        (-1, None)
    };

    let hit_memory = peak_memory >= limits.memory_bytes || mentions_oom(&stderr);
    let status = if timed_out || signal == Some(libc::SIGXCPU) {
        RunStatus::Timeout
    } else if killed_for_output || out.overflowed {
        RunStatus::OutputOverflow
    } else if exit_code == 0 {
        RunStatus::Ok
    } else if hit_memory {
        RunStatus::Oom
    } else {
        RunStatus::RuntimeError
    };

    if runner.keep_scratch {
        let kept = scratch.keep();
        log::info!("kept scratch directory {}", kept.display());
    }

    Ok(ExecutionReport {
        status,
        stdout,
        stderr,
        wall_time_used: wall.as_secs_f64(),
        peak_memory,
        exit_code,
    })
}
