use crate::error::{QsaError, Result};
use crate::keyring::NONCE_LEN;

/// Wire message type tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Hello = 0x01,
    ChallengeSet = 0x02,
    ConfirmReq = 0x03,
    ConfirmResp = 0x04,
    Result = 0x05,
    Error = 0x7f,
}

impl MsgType {
    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            0x01 => MsgType::Hello,
            0x02 => MsgType::ChallengeSet,
            0x03 => MsgType::ConfirmReq,
            0x04 => MsgType::ConfirmResp,
            0x05 => MsgType::Result,
            0x7f => MsgType::Error,
            other => return Err(QsaError::Malformed(format!("unknown message tag {other:#x}"))),
        })
    }
}

/// A framed message: type byte plus a TLV body
/// (field tag 1 byte, length 4 bytes big-endian, value).
#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub msg_type: MsgType,
    pub fields: Vec<(u8, Vec<u8>)>,
}

impl Message {
    pub fn new(msg_type: MsgType) -> Self {
        Self {
            msg_type,
            fields: Vec::new(),
        }
    }

    pub fn push(mut self, tag: u8, value: impl Into<Vec<u8>>) -> Self {
        self.fields.push((tag, value.into()));
        self
    }

    pub fn get(&self, tag: u8) -> Result<&[u8]> {
        self.fields
            .iter()
            .find(|(t, _)| *t == tag)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| QsaError::Malformed(format!("missing field {tag:#x}")))
    }

    pub fn get_array<const N: usize>(&self, tag: u8) -> Result<[u8; N]> {
        let v = self.get(tag)?;
        v.try_into()
            .map_err(|_| QsaError::Malformed(format!("field {tag:#x} has length {}", v.len())))
    }

    pub fn get_u32(&self, tag: u8) -> Result<u32> {
        Ok(u32::from_be_bytes(self.get_array::<4>(tag)?))
    }

    pub fn get_u8(&self, tag: u8) -> Result<u8> {
        Ok(self.get_array::<1>(tag)?[0])
    }

    pub fn encode_body(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (tag, value) in &self.fields {
            out.push(*tag);
            out.extend_from_slice(&(value.len() as u32).to_be_bytes());
            out.extend_from_slice(value);
        }
        out
    }

    pub fn decode(msg_type_byte: u8, body: &[u8]) -> Result<Self> {
        let msg_type = MsgType::from_byte(msg_type_byte)?;
        let mut fields = Vec::new();
        let mut pos = 0usize;
        while pos < body.len() {
            if pos + 5 > body.len() {
                return Err(QsaError::Malformed("truncated TLV header".into()));
            }
            let tag = body[pos];
            let len = u32::from_be_bytes(body[pos + 1..pos + 5].try_into().unwrap()) as usize;
            if pos + 5 + len > body.len() {
                return Err(QsaError::Malformed("TLV value overruns body".into()));
            }
            fields.push((tag, body[pos + 5..pos + 5 + len].to_vec()));
            pos += 5 + len;
        }
        Ok(Self { msg_type, fields })
    }
}

// Field tags shared by the session messages.
pub const F_VERSION: u8 = 0x01;
pub const F_NONCE: u8 = 0x02;
pub const F_SCHEDULE_ID: u8 = 0x03;
pub const F_N: u8 = 0x04;
pub const F_M: u8 = 0x05;
pub const F_K: u8 = 0x06;
pub const F_PLANT_DEPTH: u8 = 0x07;
pub const F_BUNDLES: u8 = 0x08;
pub const F_TAG: u8 = 0x09;
pub const F_ACCEPT: u8 = 0x0a;
pub const F_REASON: u8 = 0x0b;

pub fn hello_nonce(msg: &Message) -> Result<[u8; NONCE_LEN]> {
    msg.get_array::<NONCE_LEN>(F_NONCE)
}
