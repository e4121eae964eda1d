use photon_fabric::devices::DeviceError;
use photon_fabric::em::EmError;
use photon_fabric::fabric::FabricError;
use photon_fabric::netsim::NetsimError;
use photon_fabric::routing::RoutingError;
use photon_fabric::topopt::TopoptError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unroutable: {0}")]
    Unroutable(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Unroutable(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<EmError> for CliError {
    fn from(e: EmError) -> Self {
        match e {
            EmError::SolverFailure(_) => Self::Numerical(e.to_string()),
            EmError::Io(m) => Self::Io(m),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<TopoptError> for CliError {
    fn from(e: TopoptError) -> Self {
        match e {
            TopoptError::Em(inner) => inner.into(),
            TopoptError::Diverged { .. } => Self::Numerical(e.to_string()),
            TopoptError::Io(m) => Self::Io(m),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<DeviceError> for CliError {
    fn from(e: DeviceError) -> Self {
        match e {
            DeviceError::Em(inner) => inner.into(),
            DeviceError::Topopt(inner) => inner.into(),
            DeviceError::NoResonance { .. } | DeviceError::InsufficientSampling { .. } => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<FabricError> for CliError {
    fn from(e: FabricError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<NetsimError> for CliError {
    fn from(e: NetsimError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<RoutingError> for CliError {
    fn from(e: RoutingError) -> Self {
        match e {
            RoutingError::Unroutable(m) => Self::Unroutable(m),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<photon_fabric::table::TableError> for CliError {
    fn from(e: photon_fabric::table::TableError) -> Self {
        Self::Io(e.to_string())
    }
}
