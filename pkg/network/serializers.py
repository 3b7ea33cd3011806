from rest_framework import serializers

from network.models import EncoderFamily, HeadActivation


class ModelConfigSerializer(serializers.Serializer):
    family = serializers.ChoiceField(choices=EncoderFamily.choices, required=False)
    hidden = serializers.IntegerField(min_value=1, required=False)
    layers = serializers.IntegerField(min_value=1, required=False)
    shared_across_scenes = serializers.BooleanField(required=False)
    head_sizes = serializers.ListField(child=serializers.IntegerField(min_value=1), required=False)
    head_activation = serializers.ChoiceField(choices=HeadActivation.choices, required=False)
    use_demographics = serializers.BooleanField(required=False)
    learning_rate = serializers.FloatField(min_value=0.0, required=False, allow_null=True)

    def validate_learning_rate(self, value):
        if value is not None and value <= 0:
            raise serializers.ValidationError('learning_rate must be positive')
        return value
