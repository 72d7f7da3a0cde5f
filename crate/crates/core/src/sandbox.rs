//! One-shot subprocess execution of untrusted render scripts.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::config::RenderConfig;
use crate::error::{Error, Result};

pub const SHIM_BINARY: &str = "chartforge-shim";

#[derive(Debug, Clone)]
pub struct SandboxConfig {
    /// Program and leading arguments; `SCRIPT DATA OUT` are appended.
    pub shim: Vec<String>,
    pub timeout: Duration,
    pub max_output_bytes: u64,
    pub stderr_limit: usize,
    pub env_allowlist: Vec<String>,
}

impl SandboxConfig {
    pub fn from_config(cfg: &RenderConfig) -> Result<Self> {
        let shim = if cfg.shim.is_empty() {
            vec![locate_shim()?.to_string_lossy().into_owned()]
        } else {
            cfg.shim.clone()
        };
        Ok(SandboxConfig {
            shim,
            timeout: Duration::from_secs_f64(cfg.timeout_secs),
            max_output_bytes: cfg.max_output_bytes,
            stderr_limit: cfg.stderr_limit,
            env_allowlist: cfg.env_allowlist.clone(),
        })
    }
}

/// Finds the bundled shim next to the running executable (or one directory
/// up, which covers test binaries under `target/*/deps`).
pub fn locate_shim() -> Result<PathBuf> {
    let exe = std::env::current_exe().map_err(|e| Error::SandboxUnavailable(e.to_string()))?;
    let name = format!("{SHIM_BINARY}{}", std::env::consts::EXE_SUFFIX);
    exe.ancestors()
        .skip(1)
        .take(2)
        .map(|d| d.join(&name))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::SandboxUnavailable(format!("`{name}` not found next to {}", exe.display()))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Success,
    Failed(Option<i32>),
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct ExecResult {
    pub exit: ExitKind,
    /// Tail of stderr, at most `stderr_limit` bytes.
    pub stderr: String,
    /// The PNG (and sidecar text, if any) produced, when the run succeeded.
    pub image: Option<Vec<u8>>,
    pub sidecar: Option<Vec<u8>>,
}

/// Keeps the last `limit` bytes of `text`, cut at a char boundary.
pub fn truncate_tail(text: &str, limit: usize) -> String {
    if text.len() <= limit {
        return text.to_string();
    }
    let mut start = text.len() - limit;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    text[start..].to_string()
}

/// Runs `shim SCRIPT DATA OUT` inside a fresh temp directory with a
/// scrubbed environment, a wall-clock timeout and a file-size limit.
pub fn execute(cfg: &SandboxConfig, source: &str, data_json: &str) -> Result<ExecResult> {
    let dir = tempfile::Builder::new()
        .prefix("chartforge-render-")
        .tempdir()
        .map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let script = dir.path().join("script.py");
    let data = dir.path().join("data.json");
    let out = dir.path().join("out.png");
    std::fs::write(&script, source).map_err(|e| Error::io(&script, e))?;
    std::fs::write(&data, data_json).map_err(|e| Error::io(&data, e))?;

    let (prog, lead) = cfg
        .shim
        .split_first()
        .ok_or_else(|| Error::SandboxUnavailable("empty shim command".into()))?;
    let mut cmd = Command::new(prog);
    cmd.args(lead)
        .arg(&script)
        .arg(&data)
        .arg(&out)
        .current_dir(dir.path())
        .env_clear()
        .env("HOME", dir.path())
        .env("MPLCONFIGDIR", dir.path())
        .env("MPLBACKEND", "Agg")
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped());
    for key in &cfg.env_allowlist {
        if key == "MPLCONFIGDIR" {
            continue;
        }
        if let Some(v) = std::env::var_os(key) {
            cmd.env(key, v);
        }
    }
    confine(&mut cmd, cfg.max_output_bytes);

    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
            Error::SandboxUnavailable(format!("cannot start `{prog}`: {e}"))
        }
        _ => Error::io(prog, e),
    })?;
    let mut pipe = child.stderr.take().expect("stderr piped");
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        buf
    });

    let started = Instant::now();
    let status = loop {
        match child.try_wait().map_err(|e| Error::io(prog, e))? {
            Some(status) => break Some(status),
            None if started.elapsed() >= cfg.timeout => {
                kill_tree(&mut child);
                let _ = child.wait();
                break None;
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    };
    let stderr_bytes = reader.join().unwrap_or_default();
    let stderr = truncate_tail(&String::from_utf8_lossy(&stderr_bytes), cfg.stderr_limit);

    let exit = match status {
        None => ExitKind::TimedOut,
        Some(s) if s.success() => ExitKind::Success,
        Some(s) => ExitKind::Failed(s.code()),
    };
    let (image, sidecar) = if exit == ExitKind::Success {
        let sidecar_path = dir.path().join("out.png.txt");
        (std::fs::read(&out).ok(), std::fs::read(sidecar_path).ok())
    } else {
        (None, None)
    };
    Ok(ExecResult {
        exit,
        stderr,
        image,
        sidecar,
    })
}

#[cfg(unix)]
fn confine(cmd: &mut Command, max_output_bytes: u64) {
    use std::os::unix::process::CommandExt;
    cmd.process_group(0);
    // SAFETY: setrlimit is async-signal-safe and touches no parent state.
    unsafe {
        cmd.pre_exec(move || {
            let lim = libc::rlimit {
                rlim_cur: max_output_bytes as libc::rlim_t,
                rlim_max: max_output_bytes as libc::rlim_t,
            };
            if libc::setrlimit(libc::RLIMIT_FSIZE, &lim) != 0 {
                return Err(std::io::Error::last_os_error());
            }
            Ok(())
        });
    }
}

#[cfg(not(unix))]
fn confine(_cmd: &mut Command, _max_output_bytes: u64) {}

#[cfg(unix)]
fn kill_tree(child: &mut std::process::Child) {
    // SAFETY: plain syscall on the child's own process group.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut std::process::Child) {
    let _ = child.kill();
}

/// Decodes `bytes` as PNG and checks the minimum raster size.
pub fn check_png(bytes: &[u8], min_side: u32) -> std::result::Result<(u32, u32), String> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| e.to_string())?;
    let (w, h) = (img.width(), img.height());
    if w < min_side || h < min_side {
        return Err(format!("image is {w}x{h}, below {min_side}x{min_side}"));
    }
    Ok((w, h))
}

pub fn shim_available(cfg: &SandboxConfig) -> bool {
    cfg.shim
        .first()
        .is_some_and(|p| Path::new(p).is_file() || which(p))
}

fn which(prog: &str) -> bool {
    std::env::var_os("PATH")
        .is_some_and(|paths| std::env::split_paths(&paths).any(|d| d.join(prog).is_file()))
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script_body: &str, timeout_ms: u64) -> ExecResult {
        let cfg = SandboxConfig {
            shim: vec!["sh".into()],
            timeout: Duration::from_millis(timeout_ms),
            max_output_bytes: 1 << 20,
            stderr_limit: 64,
            env_allowlist: vec!["PATH".into()],
        };
        execute(&cfg, script_body, "{}").unwrap()
    }

    #[test]
    fn nonzero_exit_keeps_stderr_tail() {
        let r = sh(
            "i=0; while [ $i -lt 50 ]; do echo line$i >&2; i=$((i+1)); done; exit 3",
            5000,
        );
        assert_eq!(r.exit, ExitKind::Failed(Some(3)));
        assert!(r.stderr.len() <= 64);
        assert!(r.stderr.ends_with("line49\n"));
    }

    #[test]
    fn timeout_kills_the_group() {
        let t = Instant::now();
        let r = sh("sleep 30 & sleep 30", 200);
        assert_eq!(r.exit, ExitKind::TimedOut);
        assert!(t.elapsed() < Duration::from_secs(10));
    }

    #[test]
    fn environment_is_scrubbed() {
        std::env::set_var("CHARTFORGE_SECRET_PROBE", "x");
        let r = sh(
            "if [ -n \"$CHARTFORGE_SECRET_PROBE\" ]; then exit 9; fi; echo ok > \"$2\"",
            5000,
        );
        assert_eq!(r.exit, ExitKind::Success);
        assert_eq!(r.image.as_deref(), Some(&b"ok\n"[..]));
    }

    #[test]
    fn output_size_is_capped() {
        let r = sh("head -c 4000000 /dev/zero > \"$2\"", 5000);
        assert_ne!(r.exit, ExitKind::Success);
    }

    #[test]
    fn missing_runtime_is_stage_level() {
        let cfg = SandboxConfig {
            shim: vec!["/nonexistent/shim".into()],
            timeout: Duration::from_secs(1),
            max_output_bytes: 1024,
            stderr_limit: 64,
            env_allowlist: vec![],
        };
        assert!(matches!(
            execute(&cfg, "", "{}"),
            Err(Error::SandboxUnavailable(_))
        ));
    }

    #[test]
    fn tail_truncation_respects_utf8() {
        assert_eq!(truncate_tail("ééé", 3), "é");
        assert_eq!(truncate_tail("abc", 10), "abc");
    }
}
