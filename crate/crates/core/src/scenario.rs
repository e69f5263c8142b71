//! Self-contained problem description: a wiretap channel, a resource state and
//! optionally an ensemble or a list of modulations to evaluate.

use serde::{Deserialize, Serialize};

use crate::channels::{channel_from_resource_state, CqEnsemble, QuantumChannel, ResourceState, WiretapChannel};
use crate::qcore::{partial_trace, DensityOperator};
use crate::rates::{theorem1_rate, trivial_rate, trivial_rate_from_choi, unassisted_rate, RateMode, RateReport};
use crate::{Error, Result};

/// Modulations `ℰ_u: A' → A` with probabilities `q(u)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modulations {
    pub probs: Vec<f64>,
    pub channels: Vec<QuantumChannel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub channel: QuantumChannel,
    /// Bob's output factors; defaults to the first output factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<Vec<String>>,
    /// Eve's output factors; defaults to the remaining output factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eve: Option<Vec<String>>,
    /// `ζ` on `A' ⊗ B' ⊗ E'`; absent means no assistance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<DensityOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<CqEnsemble>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulations: Option<Modulations>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RateMode>,
}

impl Scenario {
    pub fn new(name: &str, description: &str, channel: QuantumChannel) -> Self {
        Self {
            name: name.to_string(),
            description: description.to_string(),
            channel,
            bob: None,
            eve: None,
            resource: None,
            ensemble: None,
            modulations: None,
            mode: None,
        }
    }

    pub fn wiretap(&self) -> Result<WiretapChannel> {
        let labels: Vec<String> = self.channel.output().labels().map(str::to_string).collect();
        match (&self.bob, &self.eve) {
            (None, None) => WiretapChannel::from_channel(self.channel.clone()),
            (Some(b), Some(e)) => WiretapChannel::new(self.channel.clone(), b.clone(), e.clone()),
            (Some(b), None) => {
                let e = labels.iter().filter(|l| !b.contains(l)).cloned().collect();
                WiretapChannel::new(self.channel.clone(), b.clone(), e)
            }
            (None, Some(e)) => {
                let b = labels.iter().filter(|l| !e.contains(l)).cloned().collect();
                WiretapChannel::new(self.channel.clone(), b, e.clone())
            }
        }
    }

    pub fn resource_state(&self) -> Result<ResourceState> {
        match &self.resource {
            Some(zeta) => channel_from_resource_state(zeta),
            None => Ok(ResourceState::trivial()),
        }
    }

    /// Checks that every part parses into a consistent problem and that the
    /// default mode evaluates.
    pub fn validate(&self) -> Result<()> {
        let n = self.wiretap()?;
        let res = self.resource_state()?;
        let resource_labels = [res.alice(), res.bob(), res.eve(), res.reference()];
        for l in n.input().labels().chain(self.channel.output().labels()) {
            if resource_labels.contains(&l) {
                return Err(Error::DuplicateLabel(format!("{l} names both a channel factor and a resource factor")));
            }
        }
        if self.ensemble.is_some() || self.modulations.is_some() {
            self.evaluate(self.default_mode())?;
        }
        Ok(())
    }

    pub fn default_mode(&self) -> RateMode {
        self.mode.unwrap_or(if self.ensemble.is_none() && self.modulations.is_some() {
            RateMode::Trivial
        } else {
            RateMode::Theorem1
        })
    }

    pub fn evaluate(&self, mode: RateMode) -> Result<RateReport> {
        let n = self.wiretap()?;
        let res = self.resource_state()?;
        match mode {
            RateMode::Theorem1 => theorem1_rate(self.require_ensemble()?, &n, &res),
            RateMode::Trivial => match (&self.modulations, &self.ensemble) {
                (Some(m), _) => trivial_rate(&m.probs, &m.channels, &n, &res),
                (None, Some(ens)) => trivial_rate_from_choi(ens, &n, &res),
                (None, None) => Err(Error::Config("trivial mode needs modulations or an ensemble".into())),
            },
            RateMode::Unassisted => unassisted_rate(&self.input_ensemble(&n)?, &n),
        }
    }

    fn require_ensemble(&self) -> Result<&CqEnsemble> {
        self.ensemble
            .as_ref()
            .ok_or_else(|| Error::Config(format!("scenario '{}' has no ensemble", self.name)))
    }

    /// The ensemble on the channel input alone. Members on `A ⊗ A''` are
    /// accepted when `A''` is one-dimensional.
    fn input_ensemble(&self, n: &WiretapChannel) -> Result<CqEnsemble> {
        let ens = self.require_ensemble()?;
        let dims = ens.space().dims();
        let nd = n.input().dims();
        if dims == nd {
            return Ok(ens.clone());
        }
        if dims.len() == nd.len() + 1 && dims[..nd.len()] == nd[..] && dims[nd.len()] == 1 {
            let keep: Vec<String> = ens.space().labels().take(nd.len()).map(str::to_string).collect();
            return ens.map_states(|m: &DensityOperator| partial_trace(m, &keep));
        }
        Err(Error::space_mismatch("unassisted ensemble", n.input().to_string(), ens.space().to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }
}
