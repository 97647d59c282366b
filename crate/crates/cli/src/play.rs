//! Interactive terminal play, driven through the same session store as the
//! service.

use std::io::{BufRead, Write};

use anyhow::Result;
use cantor_core::arena::{NewSession, SessionStore, SessionView, Status};

fn prompt(out: &mut impl Write, v: &SessionView) -> Result<()> {
    match (&v.status, &v.legal) {
        (Status::AwaitingHuman, Some(b)) => {
            writeln!(out, "round {}: {} to move, {} < value < {}", v.play.len() + 1, v.human, b.lo, b.hi)?;
            write!(out, "> ")?;
        }
        _ => writeln!(out, "game over after {} rounds", v.play.len())?,
    }
    out.flush()?;
    Ok(())
}

/// Reads one fraction per line until the round limit, end of input, or
/// `quit`. Ends by printing the play file.
pub fn run(req: &NewSession, input: impl BufRead, mut out: impl Write) -> Result<SessionView> {
    let store = SessionStore::new();
    let mut view = store.create_session(req)?;
    writeln!(out, "{} vs engine {} on [{}, {}]", view.human, view.engine, view.play.config().a0(), view.play.config().b0())?;
    if let Some(a) = view.play.pending_a() {
        writeln!(out, "engine A opens with {a}")?;
    }
    prompt(&mut out, &view)?;
    for line in input.lines() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text == "quit" || text == "q" {
            writeln!(out)?;
            break;
        }
        match store.post_move(&view.id, None, text) {
            Ok(o) => {
                if let Some(r) = &o.engine_reply {
                    writeln!(out, "engine {} plays {}", r.side, r.value)?;
                }
                if let Some(b) = &o.bracket {
                    writeln!(out, "bracket [{}, {}]", b.lo, b.hi)?;
                }
                view = o.session;
            }
            Err(e) => match e.bound() {
                Some(b) => writeln!(out, "{}: need {} < value < {}", e.code(), b.lo, b.hi)?,
                None => writeln!(out, "{e}")?,
            },
        }
        if view.status == Status::Idle {
            break;
        }
        prompt(&mut out, &view)?;
    }
    if view.status == Status::Idle {
        prompt(&mut out, &view)?;
    }
    writeln!(out, "{}", serde_json::to_string(&view.play)?)?;
    Ok(view)
}
