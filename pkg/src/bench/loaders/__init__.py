"""Result writers for the benchmark pipelines.

Classes:
    ResultLoader: Writes CSV tables, text reports and parquet loss tables
"""
