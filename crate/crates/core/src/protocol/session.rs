use std::io::{Read, Write};

use serde_json::json;

use crate::compile::{
    compile_symmetric_schedule, derive_plant_seed, plant_state, seed_to_plant_circuit,
    ChallengeBundle, CompilerConfig,
};
use crate::error::{QsaError, Result};
use crate::extract::{evaluate_schedule, EvalConfig, FeatureVector, PhaseFeature, Regime};
use crate::keyring::{
    confirm_tag, derive_key, encode_transcript, AttemptGuard, Role, Transcript,
    NONCE_LEN, PROTOCOL_VERSION,
};
use crate::protocol::message::*;
use crate::protocol::wire::{read_message, write_message};
use crate::rng::SeedStream;

/// Verifier-side session parameters.
#[derive(Clone, Debug)]
pub struct VerifierConfig {
    pub n: usize,
    pub m: u8,
    pub k: usize,
    pub plant_depth: usize,
    pub schedule_id: u32,
    pub compiler: CompilerConfig,
    pub key_bits: usize,
    pub max_attempts: u32,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            n: 4,
            m: 4,
            k: 10,
            plant_depth: 3,
            schedule_id: 0,
            compiler: CompilerConfig::default(),
            key_bits: 256,
            max_attempts: 1,
        }
    }
}

/// Prover-side evaluation choices.
#[derive(Clone, Copy, Debug)]
pub struct ProverConfig {
    pub regime: Regime,
    pub eval: EvalConfig,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Q,
            eval: EvalConfig::exact(),
        }
    }
}

/// One finished session: the local verdict plus a JSON-lines event log.
#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub accepted: bool,
    pub log: Vec<serde_json::Value>,
}

impl SessionOutcome {
    pub fn log_lines(&self) -> String {
        self.log
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn fresh_nonce(rng: &mut SeedStream) -> [u8; NONCE_LEN] {
    let mut n = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut n);
    n
}

fn send_error<S: Write>(stream: &mut S, reason: &str) {
    let msg = Message::new(MsgType::Error).push(F_REASON, reason.as_bytes().to_vec());
    let _ = write_message(stream, &msg);
}

fn expect<S: Read>(stream: &mut S, want: MsgType) -> Result<Message> {
    let msg = read_message(stream)?;
    if msg.msg_type == MsgType::Error {
        let reason = msg
            .get(F_REASON)
            .map(|r| String::from_utf8_lossy(r).into_owned())
            .unwrap_or_default();
        return Err(QsaError::Protocol(format!("peer error: {reason}")));
    }
    if msg.msg_type != want {
        return Err(QsaError::Protocol(format!(
            "expected {want:?}, got {:?}",
            msg.msg_type
        )));
    }
    Ok(msg)
}

fn transcript_from(
    verifier_nonce: [u8; NONCE_LEN],
    prover_nonce: [u8; NONCE_LEN],
    schedule_id: u32,
    bundles: &[ChallengeBundle],
    m: u8,
) -> Transcript {
    Transcript {
        version: PROTOCOL_VERSION,
        verifier_nonce,
        prover_nonce,
        schedule_id,
        challenge_digests: bundles.iter().map(|b| b.digest_bytes()).collect(),
        m,
        k: bundles.len() as u32,
    }
}

/// Drive one verifier session over a byte stream.
///
/// Flow: HELLO out, HELLO back, CHALLENGE_SET out, both confirmation
/// directions (verifier challenges first), then RESULT. The verifier key
/// comes from the closed-form phase read-off; no extraction runs on this
/// side. Any malformed or out-of-order message aborts with ERROR and a
/// reject.
pub fn verifier_session<S: Read + Write>(
    stream: &mut S,
    config: &VerifierConfig,
    s0: &[u8],
    rng: &mut SeedStream,
) -> Result<SessionOutcome> {
    let mut log = Vec::new();
    match verifier_session_inner(stream, config, s0, rng, &mut log) {
        Ok(accepted) => Ok(SessionOutcome { accepted, log }),
        Err(e) => {
            send_error(stream, &e.to_string());
            log.push(json!({"event": "abort", "error": e.to_string()}));
            Ok(SessionOutcome {
                accepted: false,
                log,
            })
        }
    }
}

fn verifier_session_inner<S: Read + Write>(
    stream: &mut S,
    config: &VerifierConfig,
    s0: &[u8],
    rng: &mut SeedStream,
    log: &mut Vec<serde_json::Value>,
) -> Result<bool> {
    // fresh challenge instances for this session
    let compiler = CompilerConfig {
        seed: rng.next_u64(),
        ..config.compiler.clone()
    };
    let schedule = compile_symmetric_schedule(
        s0,
        0,
        config.k,
        config.m as usize,
        config.plant_depth,
        config.n,
        &compiler,
    )?;
    log.push(json!({
        "event": "compiled",
        "k": config.k,
        "deltas": schedule.challenges.iter().map(|c| c.witness.delta_hat).collect::<Vec<_>>(),
    }));

    let nonce_v = fresh_nonce(rng);
    let hello = Message::new(MsgType::Hello)
        .push(F_VERSION, vec![PROTOCOL_VERSION])
        .push(F_NONCE, nonce_v.to_vec())
        .push(F_SCHEDULE_ID, config.schedule_id.to_be_bytes().to_vec())
        .push(F_N, (config.n as u32).to_be_bytes().to_vec())
        .push(F_M, vec![config.m])
        .push(F_K, (config.k as u32).to_be_bytes().to_vec())
        .push(F_PLANT_DEPTH, (config.plant_depth as u32).to_be_bytes().to_vec());
    write_message(stream, &hello)?;
    log.push(json!({"event": "hello_sent"}));

    let peer_hello = expect(stream, MsgType::Hello)?;
    if peer_hello.get_u8(F_VERSION)? != PROTOCOL_VERSION {
        return Err(QsaError::Protocol("protocol version mismatch".into()));
    }
    let nonce_p = hello_nonce(&peer_hello)?;
    log.push(json!({"event": "hello_received"}));

    let bundles_json = serde_json::to_vec(&schedule.bundles)?;
    write_message(
        stream,
        &Message::new(MsgType::ChallengeSet).push(F_BUNDLES, bundles_json),
    )?;
    log.push(json!({"event": "challenges_sent"}));

    // closed-form read-off: arg<b|D|b> per instance
    let features: Vec<PhaseFeature> = schedule
        .challenges
        .iter()
        .map(|ch| PhaseFeature::new(ch.signal_phase(), config.m))
        .collect();
    let flags = vec![false; features.len()];
    let theta = FeatureVector::new(features, config.m, flags);
    let transcript = transcript_from(
        nonce_v,
        nonce_p,
        config.schedule_id,
        &schedule.bundles,
        config.m,
    );
    let key = derive_key(&theta, &transcript, config.key_bits)?;
    log.push(json!({
        "event": "key_derived",
        "transcript_bytes": encode_transcript(&transcript).len(),
    }));

    // confirmation, verifier first
    let confirm_nonce = fresh_nonce(rng);
    write_message(
        stream,
        &Message::new(MsgType::ConfirmReq).push(F_NONCE, confirm_nonce.to_vec()),
    )?;
    let resp = expect(stream, MsgType::ConfirmResp)?;
    let mut guard = AttemptGuard::new(config.max_attempts);
    let verdict = guard.check(&key, Role::Prover, &confirm_nonce, resp.get(F_TAG)?);
    log.push(json!({
        "event": "prover_confirmation",
        "accept": verdict.accept,
        "attempts_used": verdict.attempts_used,
    }));
    if !verdict.accept {
        write_message(
            stream,
            &Message::new(MsgType::Result).push(F_ACCEPT, vec![0]),
        )?;
        log.push(json!({"event": "result_sent", "accept": false}));
        return Ok(false);
    }

    let peer_req = expect(stream, MsgType::ConfirmReq)?;
    let peer_nonce = peer_req.get_array::<NONCE_LEN>(F_NONCE)?;
    let tag_v = confirm_tag(&key, Role::Verifier, &peer_nonce);
    write_message(
        stream,
        &Message::new(MsgType::ConfirmResp).push(F_TAG, tag_v.to_vec()),
    )?;
    log.push(json!({"event": "verifier_confirmation_sent"}));

    write_message(
        stream,
        &Message::new(MsgType::Result).push(F_ACCEPT, vec![1]),
    )?;
    log.push(json!({"event": "result_sent", "accept": true}));
    Ok(true)
}

/// Drive one prover session: regenerate the plants from the provisioning
/// secret, evaluate the received challenges under the configured regime,
/// derive the key and answer both confirmation directions.
pub fn prover_session<S: Read + Write>(
    stream: &mut S,
    s0: &[u8],
    config: &ProverConfig,
    rng: &mut SeedStream,
) -> Result<SessionOutcome> {
    let mut log = Vec::new();
    match prover_session_inner(stream, s0, config, rng, &mut log) {
        Ok(accepted) => Ok(SessionOutcome { accepted, log }),
        Err(e) => {
            send_error(stream, &e.to_string());
            log.push(json!({"event": "abort", "error": e.to_string()}));
            Ok(SessionOutcome {
                accepted: false,
                log,
            })
        }
    }
}

fn prover_session_inner<S: Read + Write>(
    stream: &mut S,
    s0: &[u8],
    config: &ProverConfig,
    rng: &mut SeedStream,
    log: &mut Vec<serde_json::Value>,
) -> Result<bool> {
    let hello = expect(stream, MsgType::Hello)?;
    if hello.get_u8(F_VERSION)? != PROTOCOL_VERSION {
        return Err(QsaError::Protocol("protocol version mismatch".into()));
    }
    let nonce_v = hello_nonce(&hello)?;
    let schedule_id = hello.get_u32(F_SCHEDULE_ID)?;
    let n = hello.get_u32(F_N)? as usize;
    let m = hello.get_u8(F_M)?;
    let k = hello.get_u32(F_K)? as usize;
    let plant_depth = hello.get_u32(F_PLANT_DEPTH)? as usize;
    log.push(json!({"event": "hello_received", "n": n, "m": m, "k": k}));

    let nonce_p = fresh_nonce(rng);
    write_message(
        stream,
        &Message::new(MsgType::Hello)
            .push(F_VERSION, vec![PROTOCOL_VERSION])
            .push(F_NONCE, nonce_p.to_vec()),
    )?;

    let set = expect(stream, MsgType::ChallengeSet)?;
    let bundles: Vec<ChallengeBundle> = serde_json::from_slice(set.get(F_BUNDLES)?)?;
    if bundles.len() != k {
        return Err(QsaError::Protocol(format!(
            "expected {k} challenges, received {}",
            bundles.len()
        )));
    }
    for b in &bundles {
        if b.public.n != n || !b.verify_digest() {
            return Err(QsaError::Protocol("challenge bundle inconsistent".into()));
        }
        b.public.validate()?;
    }
    log.push(json!({"event": "challenges_received", "k": bundles.len()}));

    // regenerate plants from the provisioning secret
    let publics: Vec<_> = bundles.iter().map(|b| b.public.clone()).collect();
    let plants: Vec<_> = bundles
        .iter()
        .map(|b| {
            let sigma = derive_plant_seed(s0, b.meta.index)?;
            Ok(plant_state(&seed_to_plant_circuit(&sigma, n, plant_depth)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut eval_rng = rng.child("evaluate");
    let theta = evaluate_schedule(&publics, &plants, config.regime, m, &config.eval, &mut eval_rng)?;
    log.push(json!({
        "event": "evaluated",
        "regime": format!("{:?}", config.regime),
        "low_signal": theta.low_signal.iter().filter(|&&f| f).count(),
    }));

    let transcript = transcript_from(nonce_v, nonce_p, schedule_id, &bundles, m);
    let key = derive_key(&theta, &transcript, 256)?;
    log.push(json!({"event": "key_derived"}));

    let req = expect(stream, MsgType::ConfirmReq)?;
    let verifier_challenge = req.get_array::<NONCE_LEN>(F_NONCE)?;
    let tag_p = confirm_tag(&key, Role::Prover, &verifier_challenge);
    write_message(
        stream,
        &Message::new(MsgType::ConfirmResp).push(F_TAG, tag_p.to_vec()),
    )?;
    log.push(json!({"event": "prover_confirmation_sent"}));

    let confirm_nonce = fresh_nonce(rng);
    write_message(
        stream,
        &Message::new(MsgType::ConfirmReq).push(F_NONCE, confirm_nonce.to_vec()),
    )?;
    let resp = expect(stream, MsgType::ConfirmResp)?;
    let mut guard = AttemptGuard::new(1);
    let verdict = guard.check(&key, Role::Verifier, &confirm_nonce, resp.get(F_TAG)?);
    log.push(json!({
        "event": "verifier_confirmation",
        "accept": verdict.accept,
        "attempts_used": verdict.attempts_used,
    }));

    let result = expect(stream, MsgType::Result)?;
    let verifier_accepted = result.get_u8(F_ACCEPT)? == 1;
    log.push(json!({"event": "result_received", "accept": verifier_accepted}));
    Ok(verdict.accept && verifier_accepted)
}
