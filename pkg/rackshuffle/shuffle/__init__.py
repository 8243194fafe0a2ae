''' Data shuffling of the three schemes with real payload bytes.

The subpackage synthesizes the Map outputs, runs the unicast and coded multicast transmissions
of each scheme between the server memories, meters their intra-rack and cross-rack costs, and
verifies that every reducer ends up with the correct values.
'''

from .codec import Payload, CodedPacket, as_payload, payload_oracle, encode, decode
from .store import (
    UnknownValueError, MapOutputStore, ServerMemory, DeliveredStore, Mismatch, DeliveryReport,
    synth_map_outputs, verify_delivery, flip_bit, inject_fault
)
from .engine import (
    ShuffleCostReport, CostMeter, ShuffleEngine, UncodedShuffle, CodedShuffle, HybridShuffle,
    run_uncoded, run_coded, run_hybrid, run_shuffle
)
