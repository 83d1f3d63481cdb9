use std::io::{Read, Write};

use crate::error::{QsaError, Result};
use crate::protocol::message::Message;

/// Hard cap on a single frame; challenge sets dominate and stay far below.
const MAX_FRAME: usize = 64 << 20;

/// Frame: 4-byte big-endian length prefix covering the type byte and body.
pub fn write_message<W: Write>(w: &mut W, msg: &Message) -> Result<()> {
    let body = msg.encode_body();
    let len = 1 + body.len();
    w.write_all(&(len as u32).to_be_bytes())?;
    w.write_all(&[msg.msg_type as u8])?;
    w.write_all(&body)?;
    w.flush()?;
    Ok(())
}

pub fn read_message<R: Read>(r: &mut R) -> Result<Message> {
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let len = u32::from_be_bytes(len_bytes) as usize;
    if len == 0 || len > MAX_FRAME {
        return Err(QsaError::Malformed(format!("frame length {len} out of range")));
    }
    let mut frame = vec![0u8; len];
    r.read_exact(&mut frame)?;
    Message::decode(frame[0], &frame[1..])
}
