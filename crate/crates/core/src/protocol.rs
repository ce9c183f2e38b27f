//! Constructor/evaluator exchange.
//!
//! Messages travel as one JSON object per line with a `type` tag, so a
//! session can run in-process, across any byte stream, or be replayed from
//! a transcript file. A proposal carries its MCS set as an ASCII bit string:
//! five bits per index, most significant bit first, indices ascending.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::action_space::{McsCombination, RegionActionSpace};
use crate::agent::QAgent;
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, UePopulation};
use crate::mcs::{McsTable, MAX_MCS_INDEX};
use crate::region::Region;

/// Bits per MCS index in a proposal.
pub const BITS_PER_MCS: usize = 5;

pub fn encode_proposal(combo: &McsCombination) -> Result<String> {
    let mut bits = String::with_capacity(BITS_PER_MCS * combo.k());
    for &m in combo.indices() {
        if m > MAX_MCS_INDEX {
            return Err(Error::Malformed(format!("MCS index {m} does not fit the table")));
        }
        bits.push_str(&format!("{m:05b}"));
    }
    Ok(bits)
}

pub fn decode_proposal(bits: &str) -> Result<McsCombination> {
    if bits.is_empty() || !bits.len().is_multiple_of(BITS_PER_MCS) {
        return Err(Error::Malformed(format!("bit string length {} is not a positive multiple of 5", bits.len())));
    }
    if let Some(c) = bits.chars().find(|c| *c != '0' && *c != '1') {
        return Err(Error::Malformed(format!("unexpected character {c:?} in bit string")));
    }
    let mut indices = Vec::with_capacity(bits.len() / BITS_PER_MCS);
    for group in bits.as_bytes().chunks(BITS_PER_MCS) {
        let v = group.iter().fold(0u8, |acc, &b| (acc << 1) | (b - b'0'));
        if v > MAX_MCS_INDEX {
            return Err(Error::Malformed(format!("group value {v} exceeds 28")));
        }
        if indices.last().is_some_and(|&prev| v <= prev) {
            return Err(Error::Malformed("MCS groups are not strictly ascending".into()));
        }
        indices.push(v);
    }
    McsCombination::new(indices)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub seed: u64,
    pub n_ues: usize,
    pub k: usize,
    pub max_rounds: usize,
    pub thresholds: BTreeMap<Region, f64>,
    pub table_source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChallengeMessage {
    pub p25_db: f64,
    pub p50_db: f64,
    pub p75_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalMessage {
    pub region: Region,
    pub round: usize,
    pub bits: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreMessage {
    pub region: Region,
    pub round: usize,
    pub mss: f64,
    pub se_norm: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Consensus,
    NoConsensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndMessage {
    pub outcome: Outcome,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Session(SessionHeader),
    Challenge(ChallengeMessage),
    Proposal(ProposalMessage),
    Score(ScoreMessage),
    End(EndMessage),
}

impl Message {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("messages always serialise")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line.trim()).map_err(|e| Error::Malformed(e.to_string()))
    }
}

/// Parameters both parties agree on before the game starts.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub k: usize,
    pub max_rounds: usize,
    pub thresholds: BTreeMap<Region, f64>,
}

impl SessionConfig {
    pub fn uniform(k: usize, max_rounds: usize, threshold: f64) -> Self {
        Self { k, max_rounds, thresholds: Region::ALL.iter().map(|&r| (r, threshold)).collect() }
    }

    fn threshold(&self, region: Region) -> f64 {
        self.thresholds.get(&region).copied().unwrap_or(f64::INFINITY)
    }
}

/// The proposing side of the game.
pub trait Constructor {
    fn on_challenge(&mut self, _challenge: &ChallengeMessage) {}

    fn propose(&mut self, region: Region) -> Result<McsCombination>;

    fn observe(&mut self, score: &ScoreMessage);
}

/// Evaluator side: decodes proposals and answers with scores.
#[derive(Debug, Clone)]
pub struct EvaluatorParty<'a> {
    evaluator: &'a Evaluator,
    k: usize,
}

impl<'a> EvaluatorParty<'a> {
    pub fn new(evaluator: &'a Evaluator, k: usize) -> Self {
        Self { evaluator, k }
    }

    pub fn challenge(&self) -> ChallengeMessage {
        let (p25_db, p50_db, p75_db) = self.evaluator.challenge();
        ChallengeMessage { p25_db, p50_db, p75_db }
    }

    pub fn score(&self, proposal: &ProposalMessage) -> Result<ScoreMessage> {
        let combo = decode_proposal(&proposal.bits)?;
        if combo.k() != self.k {
            return Err(Error::Malformed(format!("expected {} MCSs, proposal has {}", self.k, combo.k())));
        }
        let rec = self.evaluator.score_combo(proposal.region, 0, &combo)?;
        Ok(ScoreMessage { region: proposal.region, round: proposal.round, mss: rec.mss, se_norm: rec.se_norm, reward: rec.reward })
    }

    /// Answers every `proposal` line read from `input` with a `score` line on
    /// `output`, until end of stream. Other message types are rejected.
    pub fn serve<R: BufRead, W: Write>(&self, input: R, mut output: W) -> Result<usize> {
        let mut answered = 0;
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match Message::from_line(&line)? {
                Message::Proposal(p) => {
                    writeln!(output, "{}", Message::Score(self.score(&p)?).to_line())?;
                    answered += 1;
                }
                other => return Err(Error::Protocol(format!("evaluator cannot handle {other:?}"))),
            }
        }
        output.flush()?;
        Ok(answered)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub messages: Vec<Message>,
}

impl Transcript {
    pub fn outcome(&self) -> Option<Outcome> {
        self.messages.iter().rev().find_map(|m| match m {
            Message::End(e) => Some(e.outcome),
            _ => None,
        })
    }

    pub fn proposals(&self, region: Region) -> impl Iterator<Item = &ProposalMessage> {
        self.messages.iter().filter_map(move |m| match m {
            Message::Proposal(p) if p.region == region => Some(p),
            _ => None,
        })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for m in &self.messages {
            writeln!(w, "{}", m.to_line())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut messages = Vec::new();
        for line in r.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                messages.push(Message::from_line(&line)?);
            }
        }
        Ok(Self { messages })
    }
}

/// Plays the game: challenge, then per round one proposal and one score for
/// every region still below its threshold. Every message passes through the
/// line codec, exactly as it would over a byte stream.
pub fn run_session<C: Constructor>(constructor: &mut C, evaluator: &Evaluator, config: &SessionConfig) -> Result<Transcript> {
    let party = EvaluatorParty::new(evaluator, config.k);
    let pop = evaluator.population();
    let mut messages = Vec::new();
    let mut send = |m: Message| -> Result<Message> {
        let echoed = Message::from_line(&m.to_line())?;
        messages.push(echoed.clone());
        Ok(echoed)
    };

    send(Message::Session(SessionHeader {
        seed: pop.seed(),
        n_ues: pop.len(),
        k: config.k,
        max_rounds: config.max_rounds,
        thresholds: config.thresholds.clone(),
        table_source: evaluator.table().source().to_string(),
    }))?;
    if let Message::Challenge(c) = send(Message::Challenge(party.challenge()))? {
        constructor.on_challenge(&c);
    }

    let mut pending: Vec<Region> = Region::ALL.to_vec();
    let mut rounds = 0;
    while !pending.is_empty() && rounds < config.max_rounds {
        let mut still = Vec::new();
        for &region in &pending {
            let combo = constructor.propose(region)?;
            let proposal = ProposalMessage { region, round: rounds, bits: encode_proposal(&combo)? };
            let Message::Proposal(received) = send(Message::Proposal(proposal))? else { unreachable!() };
            let Message::Score(score) = send(Message::Score(party.score(&received)?))? else { unreachable!() };
            constructor.observe(&score);
            if score.reward < config.threshold(region) {
                still.push(region);
            }
        }
        pending = still;
        rounds += 1;
    }
    let outcome = if pending.is_empty() { Outcome::Consensus } else { Outcome::NoConsensus };
    send(Message::End(EndMessage { outcome, rounds }))?;
    Ok(Transcript { messages })
}

/// Result of replaying a transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub scores_checked: usize,
    pub mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Rebuilds the evaluator from the transcript header and rescores every
/// proposal, requiring bit-identical challenge and score values.
pub fn verify_transcript(transcript: &Transcript, table: &McsTable) -> Result<VerifyReport> {
    let mut it = transcript.messages.iter();
    let Some(Message::Session(header)) = it.next() else {
        return Err(Error::Protocol("transcript does not start with a session header".into()));
    };
    let evaluator = Evaluator::new(UePopulation::simulate(header.n_ues, header.seed)?, table.clone());
    let party = EvaluatorParty::new(&evaluator, header.k);
    let mut report = VerifyReport { scores_checked: 0, mismatches: Vec::new() };
    let mut last_proposal: Option<&ProposalMessage> = None;
    for m in it {
        match m {
            Message::Challenge(c) => {
                if !bits_eq_challenge(c, &party.challenge()) {
                    report.mismatches.push("challenge percentiles differ".into());
                }
            }
            Message::Proposal(p) => last_proposal = Some(p),
            Message::Score(s) => {
                let p = last_proposal
                    .take()
                    .ok_or_else(|| Error::Protocol(format!("score for {} round {} without a proposal", s.region, s.round)))?;
                if p.region != s.region || p.round != s.round {
                    return Err(Error::Protocol("score does not answer the preceding proposal".into()));
                }
                let expected = party.score(p)?;
                report.scores_checked += 1;
                if !bits_eq_score(s, &expected) {
                    report.mismatches.push(format!(
                        "{} round {}: logged ({}, {}, {}) recomputed ({}, {}, {})",
                        s.region, s.round, s.mss, s.se_norm, s.reward, expected.mss, expected.se_norm, expected.reward
                    ));
                }
            }
            Message::Session(_) => return Err(Error::Protocol("second session header".into())),
            Message::End(_) => {}
        }
    }
    Ok(report)
}

fn bits_eq_challenge(a: &ChallengeMessage, b: &ChallengeMessage) -> bool {
    a.p25_db.to_bits() == b.p25_db.to_bits() && a.p50_db.to_bits() == b.p50_db.to_bits() && a.p75_db.to_bits() == b.p75_db.to_bits()
}

fn bits_eq_score(a: &ScoreMessage, b: &ScoreMessage) -> bool {
    a.mss.to_bits() == b.mss.to_bits() && a.se_norm.to_bits() == b.se_norm.to_bits() && a.reward.to_bits() == b.reward.to_bits()
}

/// Replays a fixed combination per region.
#[derive(Debug, Clone)]
pub struct ScriptedConstructor {
    combos: BTreeMap<Region, McsCombination>,
}

impl ScriptedConstructor {
    pub fn new(combos: BTreeMap<Region, McsCombination>) -> Self {
        Self { combos }
    }
}

impl Constructor for ScriptedConstructor {
    fn propose(&mut self, region: Region) -> Result<McsCombination> {
        self.combos.get(&region).cloned().ok_or_else(|| Error::Protocol(format!("no scripted combination for {region}")))
    }

    fn observe(&mut self, _score: &ScoreMessage) {}
}

/// Constructor backed by the three Q-learning agents. Each score received
/// becomes the agent's new state; when `learning` is set the agent also
/// backs up the reward.
#[derive(Debug, Clone)]
pub struct AgentConstructor {
    agents: Vec<QAgent>,
    spaces: Vec<RegionActionSpace>,
    learning: bool,
    // (state, action taken to reach the current proposal) per region
    pending: BTreeMap<Region, (Option<usize>, Option<crate::action_space::Action>)>,
}

impl AgentConstructor {
    pub fn new(agents: Vec<QAgent>, spaces: Vec<RegionActionSpace>, learning: bool) -> Result<Self> {
        for r in Region::ALL {
            if !agents.iter().any(|a| a.region() == r) || !spaces.iter().any(|s| s.region() == r) {
                return Err(Error::Config(format!("constructor lacks an agent or space for {r}")));
            }
        }
        Ok(Self { agents, spaces, learning, pending: BTreeMap::new() })
    }

    pub fn agents(&self) -> &[QAgent] {
        &self.agents
    }

    fn parts(&mut self, region: Region) -> (&mut QAgent, &RegionActionSpace) {
        let agent = self.agents.iter_mut().find(|a| a.region() == region).expect("checked in new");
        let space = self.spaces.iter().find(|s| s.region() == region).expect("checked in new");
        (agent, space)
    }
}

impl Constructor for AgentConstructor {
    fn propose(&mut self, region: Region) -> Result<McsCombination> {
        let (state, _) = self.pending.get(&region).copied().unwrap_or((None, None));
        let (agent, space) = self.parts(region);
        let mut action = None;
        if let Some(s) = state {
            let a = agent.act(s);
            agent.set_current_combo(space.neighbor(agent.current_combo(), a));
            action = Some(a);
        }
        let combo = space.combination_at(agent.current_combo())?.clone();
        self.pending.insert(region, (state, action));
        Ok(combo)
    }

    fn observe(&mut self, score: &ScoreMessage) {
        let learning = self.learning;
        let (state, action) = self.pending.get(&score.region).copied().unwrap_or((None, None));
        let (agent, _) = self.parts(score.region);
        let next_state = agent.state_of(score.mss);
        if let (true, Some(s), Some(a)) = (learning, state, action) {
            agent.update(s, a, score.reward, next_state, false);
        }
        self.pending.insert(score.region, (Some(next_state), None));
    }
}
