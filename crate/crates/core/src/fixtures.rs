//! The SoundCity sample: one sound sensor, one observation, and the consent
//! and permission records letting an experimenter discover the sensor.

/// Namespace of the sample testbed.
pub const SOUNDCITY: &str = "http://soundcity.example.org/";

pub const SENSOR: &str = "http://soundcity.example.org/sensor.resource.3230";
pub const PLATFORM: &str = "http://soundcity.example.org/platform.resource.3230";
pub const SERVICE: &str = "http://soundcity.example.org/service.resource.3230";
pub const PROPERTY: &str = "http://soundcity.example.org/property.resource.3230";
pub const OBSERVATION: &str = "http://soundcity.example.org/observation.resource.3230.UUID";
pub const CONSENTING_PARTY: &str = "http://soundcity.example.org/consentingParty.Consent.UUID";
pub const PERMISSION: &str = "http://soundcity.example.org/permission.Consent.UUID";
pub const EXPERIMENTER: &str = "http://soundcity.example.org/experimenter.AllowedParty.UUID";
pub const ADMIN: &str = "http://soundcity.example.org/admin";

/// Resource graph: sensor, platform, location, service, unit, property.
pub const RESOURCES_TTL: &str = include_str!("../fixtures/resources.ttl");
/// Observation graph: one 90 dB(A) reading.
pub const OBSERVATION_TTL: &str = include_str!("../fixtures/observation.ttl");
/// Consent graph: the data subject owning the sensor and its consent.
pub const CONSENT_TTL: &str = include_str!("../fixtures/consent.ttl");
/// User-permissions graph: discovery permission for the experimenter.
pub const PERMISSIONS_TTL: &str = include_str!("../fixtures/permissions.ttl");
/// Sensors inside longitude -50..50 and latitude 0..100.
pub const BBOX_QUERY: &str = include_str!("../fixtures/bbox.rq");
