use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Speaker,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Speaker::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Speaker::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderError {
    pub message: String,
}

impl ProviderError {
    pub fn new(message: impl Into<String>) -> Self {
        ProviderError { message: message.into() }
    }
}

impl fmt::Display for ProviderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "provider error: {}", self.message)
    }
}

impl core::error::Error for ProviderError {}

/// A chat-completion endpoint: given the whole conversation, return the next
/// assistant reply.
pub trait Provider {
    fn complete(&mut self, conversation: &[Message]) -> Result<String, ProviderError>;
}

impl<P: Provider + ?Sized> Provider for &mut P {
    fn complete(&mut self, conversation: &[Message]) -> Result<String, ProviderError> {
        (**self).complete(conversation)
    }
}

/// Replays canned replies in order and records every conversation it saw.
/// Running out of replies is a provider error.
#[derive(Debug, Clone, Default)]
pub struct ScriptedProvider {
    replies: VecDeque<String>,
    seen: Vec<Vec<Message>>,
}

impl ScriptedProvider {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedProvider { replies: replies.into_iter().map(Into::into).collect(), seen: Vec::new() }
    }

    pub fn calls(&self) -> usize {
        self.seen.len()
    }

    pub fn conversations(&self) -> &[Vec<Message>] {
        &self.seen
    }

    pub fn remaining(&self) -> usize {
        self.replies.len()
    }
}

impl Provider for ScriptedProvider {
    fn complete(&mut self, conversation: &[Message]) -> Result<String, ProviderError> {
        self.seen.push(conversation.to_vec());
        self.replies
            .pop_front()
            .ok_or_else(|| ProviderError::new("scripted provider has no replies left"))
    }
}

/// Wraps a closure as a provider; handy for mocks whose reply depends on the
/// prompt.
pub struct FnProvider<F> {
    f: F,
    calls: usize,
}

impl<F> FnProvider<F>
where
    F: FnMut(&[Message]) -> Result<String, ProviderError>,
{
    pub fn new(f: F) -> Self {
        FnProvider { f, calls: 0 }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl<F> Provider for FnProvider<F>
where
    F: FnMut(&[Message]) -> Result<String, ProviderError>,
{
    fn complete(&mut self, conversation: &[Message]) -> Result<String, ProviderError> {
        self.calls += 1;
        (self.f)(conversation)
    }
}

/// A provider that always fails, e.g. to prove a code path makes no calls.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unreachable;

impl Provider for Unreachable {
    fn complete(&mut self, _: &[Message]) -> Result<String, ProviderError> {
        Err(ProviderError::new("unreachable provider".to_string()))
    }
}
