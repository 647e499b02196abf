use super::{ConceptDef, PropertyDef, PropertyKind, Vocabulary};
use crate::ns::{con, dul, gdprtext, geo, iot_lite, iot_taxonomy, priv_, qu, schema, sf, sosa, ssn, ssn_system, xsd};

use PropertyKind::{Data, Object};

fn concepts() -> Vec<ConceptDef> {
    let mut out = vec![
        ConceptDef::new(ssn::SYSTEM, "System", "A unit of infrastructure that implements a procedure."),
        ConceptDef::new(sosa::SENSOR, "Sensor", "A device or agent that produces observations.").sub_of(ssn::SYSTEM),
        ConceptDef::new(sosa::ACTUATOR, "Actuator", "A device or agent that changes the state of the world.")
            .sub_of(ssn::SYSTEM),
        ConceptDef::new(sosa::PLATFORM, "Platform", "Something that hosts sensors, actuators or other platforms."),
        ConceptDef::new(sosa::OBSERVATION, "Observation", "A single act of estimating a property value."),
        ConceptDef::new(sosa::ACTUATION, "Actuation", "A single act of changing a property."),
        ConceptDef::new(sosa::OBSERVABLE_PROPERTY, "Observable property", "A quality that can be observed."),
        ConceptDef::new(
            sosa::OBSERVED_PROPERTY,
            "Observed property",
            "Alias of observable property, kept for data that uses this name.",
        )
        .equivalent_to(sosa::OBSERVABLE_PROPERTY),
        ConceptDef::new(sosa::ACTUATABLE_PROPERTY, "Actuatable property", "A quality that can be acted upon."),
        ConceptDef::new(sosa::FEATURE_OF_INTEREST, "Feature of interest", "The thing whose property is observed."),
        ConceptDef::new(sosa::RESULT, "Result", "The outcome of an observation or actuation."),
        ConceptDef::new(iot_lite::SERVICE, "Service", "A network endpoint that exposes a device."),
        ConceptDef::new(
            iot_lite::METADATA,
            "Metadata",
            "Open-ended key/value annotation for features the schema does not cover.",
        ),
        ConceptDef::new(
            ssn_system::SYSTEM_PROPERTY,
            "System property",
            "A capability or operating condition of a system.",
        ),
        ConceptDef::new(iot_taxonomy::QUALITY_OF_OBSERVATION, "Quality of observation", "Graded trust in an observation."),
        ConceptDef::new(iot_taxonomy::SOUND_SENSOR, "Sound sensor", "Sensor measuring sound pressure.").sub_of(sosa::SENSOR),
        ConceptDef::new(iot_taxonomy::TEMPERATURE_SENSOR, "Temperature sensor", "Sensor measuring temperature.")
            .sub_of(sosa::SENSOR),
        ConceptDef::new(iot_taxonomy::SOUND_PRESSURE_LEVEL, "Sound pressure level", "Loudness of ambient sound.")
            .sub_of(sosa::OBSERVABLE_PROPERTY),
        ConceptDef::new(iot_taxonomy::TEMPERATURE, "Temperature", "Ambient temperature.").sub_of(sosa::OBSERVABLE_PROPERTY),
        ConceptDef::new(qu::UNIT, "Unit", "A unit of measure."),
        ConceptDef::new(iot_taxonomy::DECIBEL_A, "Decibel A", "A-weighted decibel.").sub_of(qu::UNIT),
        ConceptDef::new(iot_taxonomy::DEGREE_CELSIUS, "Degree Celsius", "Celsius temperature unit.").sub_of(qu::UNIT),
        ConceptDef::new(iot_taxonomy::DOMAIN_OF_INTEREST, "Domain of interest", "Application area a device serves."),
        ConceptDef::new(iot_taxonomy::ENVIRONMENT, "Environment", "Environmental monitoring.")
            .sub_of(iot_taxonomy::DOMAIN_OF_INTEREST),
        ConceptDef::new(geo::SPATIAL_THING, "Spatial thing", "Anything with a spatial extent."),
        ConceptDef::new(geo::POINT, "Point", "A WGS84 coordinate pair.").sub_of(geo::SPATIAL_THING),
        ConceptDef::new(sf::POINT, "Simple-features point", "A point geometry.").sub_of(geo::SPATIAL_THING),
        ConceptDef::new(con::ALLOWED_PARTY, "Allowed party", "A user who may be given permissions."),
        ConceptDef::new(con::PERMISSION, "Permission", "Access granted to parties for data and an activity."),
        ConceptDef::new(con::ACTION, "Action", "An activity a permission covers."),
        ConceptDef::new(con::PURPOSE, "Purpose", "Why an activity is carried out."),
        ConceptDef::new(con::CONSENT, "Consent", "Agreement given by a consenting party."),
        ConceptDef::new(con::CONSENTING_PARTY, "Consenting party", "Owner of data who gives consent."),
        ConceptDef::new(con::DATA_SUBJECT, "Data subject", "A natural person the data is about.")
            .sub_of(con::CONSENTING_PARTY),
        ConceptDef::new(gdprtext::CONTROLLER, "Controller", "Body that decides how data is processed."),
        ConceptDef::new(iot_taxonomy::DISCOVER_SENSORS, "Discover sensors", "Finding which sensors exist.")
            .sub_of(con::ACTION),
        ConceptDef::new(
            iot_taxonomy::GET_WORKPLACE_OBSERVATIONS,
            "Get workplace observations",
            "Reading observations made at a workplace.",
        )
        .sub_of(con::ACTION),
        ConceptDef::new(
            iot_taxonomy::KNOW_SENSORS_IN_THE_AREA,
            "Know sensors in the area",
            "Learning what is deployed nearby.",
        )
        .sub_of(con::PURPOSE),
    ];
    for (iri, label) in [
        (ssn_system::ACCURACY, "Accuracy"),
        (ssn_system::FREQUENCY, "Frequency"),
        (ssn_system::LATENCY, "Latency"),
        (ssn_system::PRECISION, "Precision"),
        (ssn_system::RESOLUTION, "Resolution"),
        (ssn_system::RESPONSE_TIME, "Response time"),
    ] {
        out.push(ConceptDef::new(iri, label, "A system property.").sub_of(ssn_system::SYSTEM_PROPERTY));
    }
    for (iri, label) in [
        (iot_taxonomy::POOR, "Poor"),
        (iot_taxonomy::FAIR, "Fair"),
        (iot_taxonomy::GOOD, "Good"),
    ] {
        out.push(
            ConceptDef::new(iri, label, "A grade of observation quality.").sub_of(iot_taxonomy::QUALITY_OF_OBSERVATION),
        );
    }
    out
}

const DATA_TARGETS: [&str; 5] = [
    ssn::SYSTEM,
    iot_lite::SERVICE,
    sosa::OBSERVED_PROPERTY,
    sosa::OBSERVABLE_PROPERTY,
    sosa::ACTUATABLE_PROPERTY,
];

fn properties() -> Vec<PropertyDef> {
    vec![
        // sosa / ssn
        PropertyDef::new(sosa::MADE_BY_SENSOR, Object, "made by sensor", "Sensor that made an observation.")
            .domain(&[sosa::OBSERVATION])
            .range(&[sosa::SENSOR])
            .inverse_of(sosa::MADE_OBSERVATION),
        PropertyDef::new(sosa::MADE_OBSERVATION, Object, "made observation", "Observation made by a sensor.")
            .domain(&[sosa::SENSOR])
            .range(&[sosa::OBSERVATION]),
        PropertyDef::new(sosa::MADE_BY_ACTUATOR, Object, "made by actuator", "Actuator that carried out an actuation.")
            .domain(&[sosa::ACTUATION])
            .range(&[sosa::ACTUATOR])
            .inverse_of(sosa::MADE_ACTUATION),
        PropertyDef::new(sosa::MADE_ACTUATION, Object, "made actuation", "Actuation carried out by an actuator.")
            .domain(&[sosa::ACTUATOR])
            .range(&[sosa::ACTUATION]),
        PropertyDef::new(sosa::OBSERVES, Object, "observes", "Property a sensor measures.")
            .domain(&[sosa::SENSOR])
            .range(&[sosa::OBSERVABLE_PROPERTY])
            .inverse_of(sosa::IS_OBSERVED_BY),
        PropertyDef::new(sosa::IS_OBSERVED_BY, Object, "is observed by", "Sensor measuring a property.")
            .domain(&[sosa::OBSERVABLE_PROPERTY])
            .range(&[sosa::SENSOR]),
        PropertyDef::new(sosa::OBSERVED_PROPERTY_P, Object, "observed property", "Property an observation is about.")
            .domain(&[sosa::OBSERVATION])
            .range(&[sosa::OBSERVABLE_PROPERTY]),
        PropertyDef::new(sosa::ACTS_ON_PROPERTY, Object, "acts on property", "Property an actuation changes.")
            .domain(&[sosa::ACTUATION, sosa::ACTUATOR])
            .range(&[sosa::ACTUATABLE_PROPERTY])
            .inverse_of(sosa::IS_ACTED_ON_BY),
        PropertyDef::new(sosa::IS_ACTED_ON_BY, Object, "is acted on by", "Actuation or actuator changing a property.")
            .domain(&[sosa::ACTUATABLE_PROPERTY])
            .range(&[sosa::ACTUATION, sosa::ACTUATOR]),
        PropertyDef::new(sosa::HAS_RESULT, Object, "has result", "Result of an observation or actuation.")
            .domain(&[sosa::OBSERVATION, sosa::ACTUATION])
            .range(&[sosa::RESULT])
            .inverse_of(sosa::IS_RESULT_OF),
        PropertyDef::new(sosa::IS_RESULT_OF, Object, "is result of", "Observation or actuation a result belongs to.")
            .domain(&[sosa::RESULT])
            .range(&[sosa::OBSERVATION, sosa::ACTUATION]),
        PropertyDef::new(
            sosa::HAS_FEATURE_OF_INTEREST,
            Object,
            "has feature of interest",
            "Thing an observation is about.",
        )
        .domain(&[sosa::OBSERVATION, sosa::ACTUATION])
        .range(&[sosa::FEATURE_OF_INTEREST])
        .inverse_of(sosa::IS_FEATURE_OF_INTEREST_OF),
        PropertyDef::new(
            sosa::IS_FEATURE_OF_INTEREST_OF,
            Object,
            "is feature of interest of",
            "Observation about this thing.",
        )
        .domain(&[sosa::FEATURE_OF_INTEREST])
        .range(&[sosa::OBSERVATION, sosa::ACTUATION]),
        PropertyDef::new(sosa::RESULT_TIME, Data, "result time", "When the result became available.")
            .domain(&[sosa::OBSERVATION, sosa::ACTUATION])
            .range(&[xsd::DATE_TIME]),
        PropertyDef::new(sosa::IS_HOSTED_BY, Object, "is hosted by", "Platform carrying a system.")
            .domain(&[ssn::SYSTEM])
            .range(&[sosa::PLATFORM])
            .inverse_of(sosa::HOSTS),
        PropertyDef::new(sosa::HOSTS, Object, "hosts", "System carried by a platform.")
            .domain(&[sosa::PLATFORM])
            .range(&[ssn::SYSTEM]),
        PropertyDef::new(ssn_system::HAS_SYSTEM_PROPERTY, Object, "has system property", "A capability of a system.")
            .domain(&[ssn::SYSTEM])
            .range(&[ssn_system::SYSTEM_PROPERTY]),
        // iot-lite
        PropertyDef::new(iot_lite::EXPOSED_BY, Object, "exposed by", "Service through which a system is reachable.")
            .domain(&[ssn::SYSTEM])
            .range(&[iot_lite::SERVICE])
            .inverse_of(iot_lite::EXPOSES),
        PropertyDef::new(iot_lite::EXPOSES, Object, "exposes", "System reachable through a service.")
            .domain(&[iot_lite::SERVICE])
            .range(&[ssn::SYSTEM]),
        PropertyDef::new(iot_lite::HAS_UNIT, Object, "has unit", "Unit of measure of the values produced.")
            .domain(&[ssn::SYSTEM, sosa::OBSERVABLE_PROPERTY])
            .range(&[qu::UNIT]),
        PropertyDef::new(iot_lite::IS_MOBILE, Data, "is mobile", "Whether the thing moves.")
            .domain(&[sosa::PLATFORM, ssn::SYSTEM])
            .range(&[xsd::BOOLEAN]),
        PropertyDef::new(iot_lite::ENDPOINT, Data, "endpoint", "Address of a service.")
            .domain(&[iot_lite::SERVICE])
            .range(&[xsd::ANY_URI]),
        // Deliberately open domain: anything may carry metadata.
        PropertyDef::new(iot_lite::HAS_METADATA, Object, "has metadata", "Attaches a metadata record.")
            .range(&[iot_lite::METADATA]),
        PropertyDef::new(iot_lite::METADATA_TYPE, Data, "metadata type", "Key of a metadata record.")
            .domain(&[iot_lite::METADATA])
            .range(&[xsd::STRING]),
        PropertyDef::new(iot_lite::METADATA_VALUE, Data, "metadata value", "Value of a metadata record.")
            .domain(&[iot_lite::METADATA])
            .range(&[xsd::STRING]),
        // geo
        PropertyDef::new(geo::LOCATION, Object, "location", "Where something is.")
            .domain(&[sosa::PLATFORM, ssn::SYSTEM])
            .range(&[geo::POINT, sf::POINT]),
        PropertyDef::new(geo::LAT, Data, "latitude", "WGS84 latitude in degrees.")
            .domain(&[geo::SPATIAL_THING])
            .range(&[xsd::DOUBLE]),
        PropertyDef::new(geo::LONG, Data, "longitude", "WGS84 longitude in degrees.")
            .domain(&[geo::SPATIAL_THING])
            .range(&[xsd::DOUBLE]),
        // iot-taxonomy
        PropertyDef::new(
            iot_taxonomy::HAS_DOMAIN_OF_INTEREST,
            Object,
            "has domain of interest",
            "Application area of a device.",
        )
        .domain(&[ssn::SYSTEM])
        .range(&[iot_taxonomy::DOMAIN_OF_INTEREST]),
        PropertyDef::new(iot_taxonomy::HAS_QUALITY, Object, "has quality", "Quality grade of an observation.")
            .domain(&[sosa::OBSERVATION])
            .range(&[iot_taxonomy::QUALITY_OF_OBSERVATION]),
        // values
        PropertyDef::new(dul::HAS_DATA_VALUE, Data, "has data value", "A literal value; on permissions, the expiry.")
            .domain(&[sosa::RESULT, ssn_system::SYSTEM_PROPERTY, con::PERMISSION])
            .range(&[xsd::INT, xsd::DOUBLE, xsd::DATE_TIME]),
        PropertyDef::new(schema::MIN_VALUE, Data, "min value", "Lower bound of a system property.")
            .domain(&[ssn_system::SYSTEM_PROPERTY])
            .range(&[xsd::INT, xsd::DOUBLE]),
        PropertyDef::new(schema::MAX_VALUE, Data, "max value", "Upper bound of a system property.")
            .domain(&[ssn_system::SYSTEM_PROPERTY])
            .range(&[xsd::INT, xsd::DOUBLE]),
        // privacy
        PropertyDef::new(priv_::HAS_PERMISSION, Object, "has permission", "Permission held by a party.")
            .domain(&[con::ALLOWED_PARTY])
            .range(&[con::PERMISSION])
            .inverse_of(con::PERMISSION_GIVEN_TO)
            .cardinality(0, None),
        PropertyDef::new(con::PERMISSION_GIVEN_TO, Object, "permission given to", "Party holding a permission.")
            .domain(&[con::PERMISSION])
            .range(&[con::ALLOWED_PARTY]),
        PropertyDef::new(
            con::PERMISSION_GIVEN_FOR_DATA,
            Object,
            "permission given for data",
            "Resource or property a permission covers.",
        )
        .domain(&[con::PERMISSION])
        .range(&DATA_TARGETS),
        PropertyDef::new(
            con::PERMISSION_GIVEN_FOR_ACTIVITY,
            Object,
            "permission given for activity",
            "Action a permission covers.",
        )
        .domain(&[con::PERMISSION])
        .range(&[con::ACTION]),
        PropertyDef::new(con::ACTIVITY_HAS_PURPOSE, Object, "activity has purpose", "Purpose of an action.")
            .domain(&[con::ACTION])
            .range(&[con::PURPOSE]),
        PropertyDef::new(con::GIVES_CONSENT, Object, "gives consent", "Consent given by a party.")
            .domain(&[con::CONSENTING_PARTY])
            .range(&[con::CONSENT])
            .cardinality(0, None),
        PropertyDef::new(priv_::OWNS, Object, "owns", "Data held by its owner.")
            .domain(&[con::CONSENTING_PARTY])
            .range(&[
                ssn::SYSTEM,
                iot_lite::SERVICE,
                sosa::OBSERVABLE_PROPERTY,
                sosa::ACTUATABLE_PROPERTY,
                sosa::OBSERVATION,
                sosa::ACTUATION,
            ])
            .inverse_of(priv_::OWNED_BY),
        PropertyDef::new(priv_::OWNED_BY, Object, "owned by", "The single owner of a piece of data.")
            .domain(&[
                ssn::SYSTEM,
                iot_lite::SERVICE,
                sosa::OBSERVABLE_PROPERTY,
                sosa::ACTUATABLE_PROPERTY,
                sosa::OBSERVATION,
                sosa::ACTUATION,
            ])
            .range(&[con::CONSENTING_PARTY])
            .cardinality(1, Some(1)),
        PropertyDef::new(priv_::CONTROL, Object, "control", "Data administered by the controller.")
            .domain(&[gdprtext::CONTROLLER])
            .range(&[ssn::SYSTEM, iot_lite::SERVICE]),
        PropertyDef::new(
            priv_::CONSENT_FOR_PERMISSION,
            Object,
            "consent for permission",
            "Permission that a consent backs.",
        )
        .domain(&[con::CONSENT])
        .range(&[con::PERMISSION]),
    ]
}

pub(super) fn builtin() -> Vocabulary {
    Vocabulary::new(concepts(), properties()).expect("builtin vocabulary is consistent")
}
