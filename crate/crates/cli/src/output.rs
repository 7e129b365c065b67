use std::io::Write;

/// Writes one line to stdout. A closed pipe (e.g. `fairmap analyze | head`)
/// ends the process quietly instead of panicking.
pub fn say(line: impl AsRef<str>) {
    let mut out = std::io::stdout().lock();
    let result = out
        .write_all(line.as_ref().as_bytes())
        .and_then(|()| out.write_all(b"\n"));
    if let Err(e) = result {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(4);
    }
}
