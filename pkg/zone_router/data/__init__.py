from zone_router.data.ingest import Dataset, ingest, read_sequences, serialize, write_sequences
from zone_router.data.model import (
    DELIVERY,
    DEPOT,
    Package,
    RouteInstance,
    Stop,
    StopSequence,
    TimeMatrix,
    is_complete_sequence,
    validate_instance,
)
from zone_router.data.split import filter_high_quality, split_train_test, split_train_test_by_station
from zone_router.data.synth import SynthSpec, plant_benchmarks, synth_dataset, synth_instance
