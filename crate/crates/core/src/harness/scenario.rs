use crate::channel::{generate_channels, ChannelSet};
use crate::config::NetworkConfig;
use crate::error::Result;
use crate::link::{LinkEvaluator, LinkOptions};
use crate::rng::{stream, Stream};
use crate::topology::{generate_topology, Topology};

/// One deployment and channel realization, fully determined by `config.seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: NetworkConfig,
    pub topology: Topology,
    pub channels: ChannelSet,
}

impl Scenario {
    pub fn generate(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let topology = generate_topology(config, &mut stream(config.seed, Stream::Topology))?;
        let channels = generate_channels(config, &topology, &mut stream(config.seed, Stream::Fading))?;
        Ok(Self {
            config: config.clone(),
            topology,
            channels,
        })
    }

    pub fn evaluator(&self, options: LinkOptions) -> Result<LinkEvaluator<'_>> {
        LinkEvaluator::new(&self.config, &self.channels, options)
    }
}
