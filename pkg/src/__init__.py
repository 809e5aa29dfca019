"""
ConvConcatNet - decodificação do mel-espectrograma a partir de EEG
"""
