//! Read models handed to participants. Every view is built for one viewer and
//! already has identity and grade visibility rules applied, so callers can
//! serialise them as-is.

use serde::{Deserialize, Serialize};

use crate::course::Course;
use crate::error::DomainError;
use crate::ids::{ParticipantId, ReviewId, RoundId, TaskId};
use crate::model::{Participant, Phase, TaskStatus};
use crate::Timestamp;

pub const ANONYMOUS_REVIEWER: &str = "Anonymous reviewer";
pub const ANONYMOUS_AUTHOR: &str = "Anonymous author";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonView {
    pub participant: ParticipantId,
    pub display_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intro: Option<String>,
}

impl From<&Participant> for PersonView {
    fn from(p: &Participant) -> Self {
        Self { participant: p.id.clone(), display_name: p.display_name.clone(), intro: p.intro.clone() }
    }
}

/// A review the viewer still has to write.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub task_id: TaskId,
    pub round: RoundId,
    pub status: TaskStatus,
    pub content_ref: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub author: Option<PersonView>,
}

/// Feedback the viewer received. `grade` is omitted until gating allows it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackView {
    pub review_id: ReviewId,
    pub round: RoundId,
    pub prompts: [String; 4],
    pub reviewer_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reviewer: Option<PersonView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rating: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grade: Option<i64>,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenderRole {
    Reviewer,
    Author,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageView {
    pub review_id: ReviewId,
    pub role: SenderRole,
    pub sender_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sender: Option<ParticipantId>,
    pub mine: bool,
    pub body: String,
    pub sent_at: Timestamp,
}

impl Course {
    fn person(&self, id: &ParticipantId) -> Option<PersonView> {
        if self.config.condition.is_blind() {
            return None;
        }
        self.participants.get(id).map(PersonView::from)
    }

    /// Pending tasks for `reviewer`. Authors are named only in identified courses.
    pub fn tasks_for(&self, round_id: &RoundId, reviewer: &ParticipantId) -> Result<Vec<TaskView>, DomainError> {
        let round = self.round(round_id)?;
        self.participant(reviewer)?;
        Ok(round
            .pending_tasks()
            .filter(|t| &t.reviewer == reviewer)
            .map(|t| TaskView {
                task_id: t.id.clone(),
                round: round_id.clone(),
                status: t.status,
                content_ref: round.submissions.get(&t.author).map(|s| s.content_ref.clone()).unwrap_or_default(),
                author: self.person(&t.author),
            })
            .collect())
    }

    /// Feedback `participant` received. Empty until the rating phase opens.
    pub fn feedback_for(
        &self,
        round_id: &RoundId,
        participant: &ParticipantId,
    ) -> Result<Vec<FeedbackView>, DomainError> {
        let round = self.round(round_id)?;
        self.participant(participant)?;
        if round.phase() < Phase::Rating {
            return Ok(Vec::new());
        }
        let visible = Self::visible_in(round, participant);
        Ok(round
            .reviews_received(participant)
            .map(|review| {
                let reviewer = self.person(&review.reviewer);
                FeedbackView {
                    review_id: review.id.clone(),
                    round: round_id.clone(),
                    prompts: review.prompts.clone(),
                    reviewer_label: reviewer
                        .as_ref()
                        .map_or_else(|| ANONYMOUS_REVIEWER.to_string(), |p| p.display_name.clone()),
                    reviewer,
                    rating: round.ratings.get(&review.id).map(|r| r.stars),
                    grade: visible.then_some(review.grade),
                    created_at: review.created_at,
                }
            })
            .collect())
    }

    /// The conversation attached to a review, for one of its two parties.
    pub fn messages_for(&self, review_id: &ReviewId, viewer: &ParticipantId) -> Result<Vec<MessageView>, DomainError> {
        let (round, review) = self.review(review_id)?;
        if viewer != &review.reviewer && viewer != &review.author {
            return Err(DomainError::NotAParty);
        }
        let blind = self.config.condition.is_blind();
        let label = |id: &ParticipantId, role: SenderRole| match (blind, role) {
            (true, SenderRole::Reviewer) => ANONYMOUS_REVIEWER.to_string(),
            (true, SenderRole::Author) => ANONYMOUS_AUTHOR.to_string(),
            (false, _) => self.participants.get(id).map(|p| p.display_name.clone()).unwrap_or_default(),
        };
        Ok(round
            .messages
            .get(review_id)
            .into_iter()
            .flatten()
            .map(|m| {
                let role = if m.sender == review.reviewer { SenderRole::Reviewer } else { SenderRole::Author };
                MessageView {
                    review_id: review_id.clone(),
                    role,
                    sender_label: label(&m.sender, role),
                    sender: (!blind).then(|| m.sender.clone()),
                    mine: &m.sender == viewer,
                    body: m.body.clone(),
                    sent_at: m.sent_at,
                }
            })
            .collect())
    }
}
