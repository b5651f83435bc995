"""
Prometheus metrics collection
"""
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile
import structlog

logger = structlog.get_logger("metrics")

# Private registry: the CLI is a batch job, metrics leave as a textfile
REGISTRY = CollectorRegistry()

ENUMERATION_NODES = Counter(
    "tilelat_enumeration_nodes_total",
    "Search-tree nodes visited by ball enumeration",
    ["route"],
    registry=REGISTRY,
)

BUILD_STEPS = Counter(
    "tilelat_build_steps_total",
    "Builder steps by outcome",
    ["mode", "outcome"],
    registry=REGISTRY,
)

CERTIFICATES = Counter(
    "tilelat_certificates_total",
    "Certificates issued by kind",
    ["kind"],
    registry=REGISTRY,
)

COMMAND_DURATION = Histogram(
    "tilelat_command_duration_seconds",
    "CLI command duration in seconds",
    ["command"],
    buckets=[0.1, 0.5, 1, 5, 15, 60, 300],
    registry=REGISTRY,
)


def record_nodes(route: str, count: int):
    ENUMERATION_NODES.labels(route=route).inc(count)


def record_build_step(mode: str, added: bool):
    BUILD_STEPS.labels(mode=mode, outcome="added" if added else "skipped").inc()


def record_certificate(kind: str):
    CERTIFICATES.labels(kind=kind).inc()


def write_metrics(path: str):
    """Write all collected metrics in node-exporter textfile format"""
    write_to_textfile(path, REGISTRY)
    logger.info("metrics_written", path=path)
