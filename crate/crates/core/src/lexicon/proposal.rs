use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{EntryKind, Lexicon};
use crate::error::{Error, Result};
use crate::taxonomy::{Code, KeywordSource, Taxonomy};
use crate::textproc::{Analyzer, Language};

pub const APPROVALS_REQUIRED: usize = 2;
pub const REJECTIONS_REQUIRED: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalKind {
    /// Replaces the canonical French label.
    Correction,
    /// Narrower term; becomes an alias of the node.
    Specification,
}

impl FromStr for ProposalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correction" => Ok(ProposalKind::Correction),
            "specification" => Ok(ProposalKind::Specification),
            other => Err(Error::Validation(format!(
                "unknown proposal kind {other:?} (expected correction or specification)"
            ))),
        }
    }
}

impl fmt::Display for ProposalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProposalKind::Correction => "correction",
            ProposalKind::Specification => "specification",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalStatus {
    Pending,
    Accepted,
    Rejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Approve,
    Reject,
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approve" => Ok(Verdict::Approve),
            "reject" => Ok(Verdict::Reject),
            other => Err(Error::Validation(format!(
                "unknown verdict {other:?} (expected approve or reject)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub member: String,
    pub verdict: Verdict,
    pub at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationProposal {
    pub id: u64,
    pub node: Code,
    pub proposed_text: String,
    pub language: Language,
    pub kind: ProposalKind,
    pub proposer: String,
    pub status: ProposalStatus,
    pub votes: Vec<Vote>,
    pub submitted_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_at: Option<DateTime<Utc>>,
}

impl TranslationProposal {
    pub fn is_pending(&self) -> bool {
        self.status == ProposalStatus::Pending
    }

    fn members_with(&self, verdict: Verdict) -> BTreeSet<&str> {
        self.votes
            .iter()
            .filter(|v| v.verdict == verdict)
            .map(|v| v.member.as_str())
            .collect()
    }

    pub fn approvals(&self) -> usize {
        self.members_with(Verdict::Approve).len()
    }

    pub fn rejections(&self) -> usize {
        self.members_with(Verdict::Reject).len()
    }
}

impl Lexicon {
    pub fn proposals(&self) -> impl Iterator<Item = &TranslationProposal> {
        self.proposals.values()
    }

    pub fn pending(&self) -> impl Iterator<Item = &TranslationProposal> {
        self.proposals.values().filter(|p| p.is_pending())
    }

    pub fn proposal(&self, id: u64) -> Result<&TranslationProposal> {
        self.proposals
            .get(&id)
            .ok_or_else(|| Error::not_found("proposal", id.to_string()))
    }

    /// Record a pending French proposal against `node`.
    #[allow(clippy::too_many_arguments)]
    pub fn submit_proposal(
        &mut self,
        taxonomy: &Taxonomy,
        node: &str,
        text: &str,
        kind: ProposalKind,
        proposer: &str,
        at: DateTime<Utc>,
        analyzer: &Analyzer,
    ) -> Result<TranslationProposal> {
        let node = taxonomy.get(node)?;
        if proposer.trim().is_empty() {
            return Err(Error::Validation("proposer identifier is empty".into()));
        }
        if analyzer.lemma_set(text, Language::Fr).is_empty() {
            return Err(Error::Rejected(format!("proposal text {text:?} has no content words")));
        }
        self.next_proposal += 1;
        let proposal = TranslationProposal {
            id: self.next_proposal,
            node: node.code.clone(),
            proposed_text: text.trim().to_string(),
            language: Language::Fr,
            kind,
            proposer: proposer.trim().to_string(),
            status: ProposalStatus::Pending,
            votes: Vec::new(),
            submitted_at: at,
            resolved_at: None,
        };
        self.proposals.insert(proposal.id, proposal.clone());
        Ok(proposal)
    }

    /// Cast a committee vote. Two distinct approvals accept the proposal and
    /// apply it to the lexicon; two distinct rejections close it unchanged.
    pub fn vote(
        &mut self,
        id: u64,
        member: &str,
        verdict: Verdict,
        at: DateTime<Utc>,
        taxonomy: &mut Taxonomy,
        analyzer: &Analyzer,
    ) -> Result<TranslationProposal> {
        let member = member.trim();
        if member.is_empty() {
            return Err(Error::Validation("member identifier is empty".into()));
        }
        let proposal = self
            .proposals
            .get(&id)
            .ok_or_else(|| Error::not_found("proposal", id.to_string()))?;
        if !proposal.is_pending() {
            return Err(Error::Conflict(
                format!("proposal {id} is already {:?}", proposal.status).to_lowercase(),
            ));
        }
        if proposal.votes.iter().any(|v| v.member == member) {
            return Err(Error::Conflict(format!(
                "member {member} has already voted on proposal {id}"
            )));
        }
        if verdict == Verdict::Approve && proposal.proposer == member {
            return Err(Error::Rejected(format!(
                "member {member} proposed {id} and cannot approve it"
            )));
        }
        let mut updated = proposal.clone();
        updated.votes.push(Vote {
            member: member.to_string(),
            verdict,
            at,
        });
        if updated.approvals() >= APPROVALS_REQUIRED {
            updated.status = ProposalStatus::Accepted;
            updated.resolved_at = Some(at);
            self.apply(&updated, taxonomy, analyzer)?;
        } else if updated.rejections() >= REJECTIONS_REQUIRED {
            updated.status = ProposalStatus::Rejected;
            updated.resolved_at = Some(at);
        }
        self.proposals.insert(id, updated.clone());
        Ok(updated)
    }

    fn apply(&mut self, p: &TranslationProposal, taxonomy: &mut Taxonomy, analyzer: &Analyzer) -> Result<()> {
        match p.kind {
            ProposalKind::Correction => {
                if let Some(old) = self.set_canonical(&p.node, p.language, &p.proposed_text, analyzer)? {
                    self.add_alias(&p.node, p.language, &old, analyzer);
                }
                // An alias of the same text would now duplicate the canonical.
                self.entries.retain(|e| {
                    !(e.node == p.node
                        && e.language == p.language
                        && e.kind == EntryKind::Alias
                        && e.text == p.proposed_text)
                });
                taxonomy.set_label_fr(&p.node, Some(p.proposed_text.clone()))?;
            }
            ProposalKind::Specification => {
                self.add_alias(&p.node, p.language, &p.proposed_text, analyzer);
                for lemma in analyzer.lemma_set(&p.proposed_text, p.language) {
                    taxonomy.insert_added_keyword(&p.node, lemma, KeywordSource::Proposal)?;
                }
            }
        }
        Ok(())
    }
}
