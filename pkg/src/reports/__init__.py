"""CovertLink Reports Module"""
