from .result import Algorithm, EffectorResult, MetricEstimate, Protocol, ResultRecord, SweepRecord

__all__ = ["Algorithm", "EffectorResult", "MetricEstimate", "Protocol", "ResultRecord", "SweepRecord"]
