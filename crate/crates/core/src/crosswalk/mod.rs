//! Conversions between instrument records and the serializations used by
//! PID infrastructures.

pub mod datacite;
pub mod handle;
pub mod sensorml;

pub use datacite::{
    map_relation, render_datacite, to_datacite, ConversionWarning, CreatorPolicy, DataCiteError,
    DataCiteFormat, DataCiteOptions, DataCiteRecord, RelationMapping,
};
pub use handle::{
    from_handle_record, to_handle_record, to_handle_record_with, HandleEntry, HandleError,
    HandleOptions, HandleProperty, HandleRecord, TypeHandleMap,
};
pub use sensorml::{
    embed_sensorml_identifier, embed_sensorml_identifier_with, extract_sensorml_identifier,
    ConflictPolicy, SensorMlError, SensorMlOptions,
};
