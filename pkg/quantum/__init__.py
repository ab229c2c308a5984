"""양자 코어 - 다중 큐비트 선형대수, 사영 측정, 하이브리드 동역학"""
