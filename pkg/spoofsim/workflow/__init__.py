"""Case pipelines, one Scenario subclass per attack pathway"""
